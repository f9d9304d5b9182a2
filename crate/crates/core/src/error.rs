use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("halfspace intersection is unbounded")]
    UnboundedIntersection,
    #[error("halfspace intersection has empty interior")]
    EmptyInterior,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("inconsistent face orientation (signed volume {0})")]
    InconsistentOrientation(f64),
    #[error("polyhedron has zero volume")]
    ZeroVolume,
    #[error("vertex {0} has fewer than three incident faces")]
    DanglingVertex(usize),
    #[error("spherical polygon is not convex")]
    NonConvexPolygon,
    #[error("spherical polygon is degenerate")]
    DegeneratePolygon,
    #[error("edge {0} is not shared by exactly two faces")]
    NonManifoldEdge(usize),
    #[error("perturbation parameter reaches a combinatorial change")]
    CombinatorialCollapse,
    #[error("vertex {0} is neither exposed nor negatively exposed")]
    NotExposed(usize),
    #[error("face {0} is not exposed")]
    NotExposedFace(usize),
    #[error("face {0} is not semi-exposed about the requested edge")]
    NotSemiExposed(usize),
    #[error("operation requires a convex polyhedron")]
    NotConvex,
    #[error("invalid polyhedron: {0}")]
    InvalidPolyhedron(String),
    #[error("protruding wedge is unbounded")]
    UnboundedWedge,
    #[error("face {0} is not a quadrilateral")]
    NotQuadrilateral(usize),
    #[error("degenerate wedge edge")]
    DegenerateEdge,
    #[error("coincident points")]
    CoincidentPoints,
    #[error("invalid start: {0}")]
    InvalidStart(String),
    #[error("non-finite objective value")]
    NumericalBreakdown,
    #[error("unsupported face count {0}")]
    UnsupportedFaceCount(usize),
    #[error("{what} index {index} out of range")]
    IndexOutOfRange { what: &'static str, index: usize },
    #[error("catalog: {0}")]
    Catalog(String),
}
