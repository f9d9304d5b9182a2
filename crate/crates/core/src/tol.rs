//! Shared numerical tolerances. Length tolerances are relative to the
//! diameter of the polyhedron they are applied to.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Face vertices must lie within `coplanar × diameter` of the face plane.
    pub coplanar: f64,
    /// Allowed deviation of a halfspace normal from unit length.
    pub unit_norm: f64,
    /// Vertices closer than `dedup × diameter` are merged.
    pub dedup: f64,
    /// Halfspace constraints may be violated by `convexity × diameter`.
    pub convexity: f64,
    /// Angular slack used when classifying dihedral angles as convex or reflex.
    pub angle: f64,
}

pub const TOL: Tolerances = Tolerances {
    coplanar: 1e-9,
    unit_norm: 1e-12,
    dedup: 1e-9,
    convexity: 1e-9,
    angle: 1e-9,
};
