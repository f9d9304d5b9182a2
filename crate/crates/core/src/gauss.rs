//! Local geometry at vertices: Gauss images, angle deficits, spherical
//! incircles, dihedral angles and exposure classes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, Vec3, PI, TAU};
use crate::poly::Polyhedron;
use crate::tol::TOL;

/// Faces and edges around a vertex in counter-clockwise order seen from
/// outside. `edges[i]` separates `faces[i]` and `faces[i + 1]` and runs from
/// the vertex to `neighbors[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexStar {
    pub vertex: usize,
    pub faces: Vec<usize>,
    pub edges: Vec<usize>,
    pub neighbors: Vec<usize>,
}

impl VertexStar {
    pub fn degree(&self) -> usize {
        self.faces.len()
    }

    /// Position of face `f` in the star.
    pub fn face_position(&self, f: usize) -> Option<usize> {
        self.faces.iter().position(|&g| g == f)
    }
}

/// Cyclic star of faces around `v`, walking combinatorially so that it is
/// well defined at reflex and saddle vertices too.
pub fn vertex_star(p: &Polyhedron, v: usize) -> Result<VertexStar> {
    if v >= p.num_vertices() {
        return Err(Error::IndexOutOfRange {
            what: "vertex",
            index: v,
        });
    }
    let deg = p.degree(v);
    if deg < 3 {
        return Err(Error::DanglingVertex(v));
    }
    let first = p.vertex_faces(v).first().copied().ok_or(Error::DanglingVertex(v))?;
    let mut faces = Vec::with_capacity(deg);
    let mut edges = Vec::with_capacity(deg);
    let mut neighbors = Vec::with_capacity(deg);
    let mut f = first;
    loop {
        let (prev, _) = p.face_neighbors(f, v).ok_or(Error::DanglingVertex(v))?;
        let e = p.find_edge(v, prev).ok_or(Error::NonManifoldEdge(usize::MAX))?;
        faces.push(f);
        edges.push(e);
        neighbors.push(prev);
        let [f0, f1] = p.edge_faces(e);
        f = if f0 == f { f1 } else { f0 };
        if f == first {
            break;
        }
        if faces.len() > deg {
            return Err(Error::NonManifoldEdge(e));
        }
    }
    if faces.len() != deg {
        return Err(Error::NonManifold(alloc::format!(
            "vertex {v} has a disconnected face star"
        )));
    }
    Ok(VertexStar {
        vertex: v,
        faces,
        edges,
        neighbors,
    })
}

/// Geodesic polygon on the unit sphere, counter-clockwise around its
/// interior when convex.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalPolygon {
    pub points: Vec<Vec3>,
    pub convex: bool,
}

impl SphericalPolygon {
    /// Normalizes the points and decides convexity geometrically.
    pub fn from_points(points: Vec<Vec3>) -> SphericalPolygon {
        let points: Vec<Vec3> = points.into_iter().map(Vec3::normalized).collect();
        let convex = is_convex_ccw(&points);
        SphericalPolygon { points, convex }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inward pole of side `i` (from point `i` to point `i + 1`).
    pub fn side_pole(&self, i: usize) -> Vec3 {
        let n = self.points.len();
        self.points[i].cross(self.points[(i + 1) % n]).normalized()
    }

    /// Arc length of side `i`.
    pub fn side_length(&self, i: usize) -> f64 {
        let n = self.points.len();
        self.points[i].angle(self.points[(i + 1) % n])
    }

    /// Interior angle at point `i`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.points.len();
        let p = self.points[i];
        let a = self.points[(i + n - 1) % n];
        let b = self.points[(i + 1) % n];
        let ta = a - p * a.dot(p);
        let tb = b - p * b.dot(p);
        let ang = math::atan2(tb.cross(ta).dot(p), tb.dot(ta));
        if ang < 0.0 {
            ang + TAU
        } else {
            ang
        }
    }

    /// Signed spherical distance from `x` to the great circle of side `i`,
    /// positive on the interior side.
    pub fn side_distance(&self, x: Vec3, i: usize) -> f64 {
        math::asin(x.normalized().dot(self.side_pole(i)))
    }
}

fn is_convex_ccw(points: &[Vec3]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let turn = math::det3(points[i], points[(i + 1) % n], points[(i + 2) % n]);
        if !(turn > 0.0) {
            return false;
        }
    }
    let mut mean = Vec3::ZERO;
    for &p in points {
        mean += p;
    }
    let mean = mean.normalized();
    if !points.iter().all(|p| p.dot(mean) > 0.0) {
        return false;
    }
    // Rules out polygons that wind around the hemisphere more than once.
    let excess: f64 = (0..n)
        .map(|i| {
            let a = points[(i + n - 1) % n];
            let p = points[i];
            let b = points[(i + 1) % n];
            let ta = a - p * a.dot(p);
            let tb = b - p * b.dot(p);
            ta.angle(tb)
        })
        .sum::<f64>()
        - (n as f64 - 2.0) * PI;
    excess > 0.0 && excess < TAU
}

#[derive(Clone, Debug, PartialEq)]
pub struct Incircle {
    pub center: Vec3,
    pub radius: f64,
    pub tangent_sides: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExposureClass {
    Exposed,
    NegativelyExposed,
    Neither,
}

/// Outward face normals around `v` in star order.
pub fn gauss_image(p: &Polyhedron, v: usize) -> Result<SphericalPolygon> {
    let star = vertex_star(p, v)?;
    let points = star.faces.iter().map(|&f| p.halfspaces()[f].normal).collect();
    let convex = exposure(p, v) == ExposureClass::Exposed;
    Ok(SphericalPolygon { points, convex })
}

/// Gauss image of the complement at `v`: negated normals in reverse star
/// order, so that it is counter-clockwise again. Convex exactly when `v` is
/// negatively exposed.
pub fn complement_gauss_image(p: &Polyhedron, v: usize) -> Result<SphericalPolygon> {
    let star = vertex_star(p, v)?;
    let points = star.faces.iter().rev().map(|&f| -p.halfspaces()[f].normal).collect();
    let convex = exposure(p, v) == ExposureClass::NegativelyExposed;
    Ok(SphericalPolygon { points, convex })
}

/// `2π` minus the sum of face angles at `v`.
pub fn angle_deficit(p: &Polyhedron, v: usize) -> f64 {
    TAU - p.vertex_faces(v).iter().map(|&f| p.face_angle(f, v)).sum::<f64>()
}

/// Spherical excess of a convex polygon.
pub fn spherical_area(poly: &SphericalPolygon) -> Result<f64> {
    if !poly.convex {
        return Err(Error::NonConvexPolygon);
    }
    let n = poly.len();
    let sum: f64 = (0..n).map(|i| poly.interior_angle(i)).sum();
    Ok(sum - (n as f64 - 2.0) * PI)
}

/// Largest inscribed circle of a convex spherical polygon.
///
/// The polygon is the intersection of the hemispheres `⟨x, n_i⟩ ≥ 0` over its
/// inward side poles, so the incircle centre maximizes `min_i ⟨c, n_i⟩`. The
/// optimum is attained where two or three sides are active; every such
/// candidate is evaluated and the best one kept.
pub fn spherical_incircle(poly: &SphericalPolygon) -> Result<Incircle> {
    if !poly.convex {
        return Err(Error::NonConvexPolygon);
    }
    let n = poly.len();
    let poles: Vec<Vec3> = (0..n).map(|i| poly.side_pole(i)).collect();
    if poles.iter().any(|q| !(q.norm() > 0.5)) {
        return Err(Error::DegeneratePolygon);
    }
    let score = |c: Vec3| poles.iter().fold(f64::INFINITY, |m, &q| m.min(c.dot(q)));
    let mut best = Vec3::ZERO;
    let mut best_val = f64::NEG_INFINITY;
    let mut consider = |c: Vec3| {
        if !c.is_finite() || !(c.norm() > 0.5) {
            return;
        }
        let s = score(c);
        if s > best_val {
            best_val = s;
            best = c;
        }
    };
    for i in 0..n {
        for j in (i + 1)..n {
            consider((poles[i] + poles[j]).normalized());
            for k in (j + 1)..n {
                if let Some(x) = math::solve3(poles[i], poles[j], poles[k], [1.0; 3], 1e-14) {
                    consider(x.normalized());
                }
            }
        }
    }
    let radius = math::asin(best_val);
    if !(radius > TOL.angle) {
        return Err(Error::DegeneratePolygon);
    }
    let tangent_sides = (0..n)
        .filter(|&i| math::asin(best.dot(poles[i])) - radius <= 1e-9)
        .collect();
    Ok(Incircle {
        center: best,
        radius,
        tangent_sides,
    })
}

/// `(2π(1 − cos θ), 4θ)`: the area of the inscribed cap, and the area of the
/// lune of width `2θ`.
pub fn incircle_area_bounds(theta: f64) -> (f64, f64) {
    (TAU * (1.0 - math::cos(theta)), 4.0 * theta)
}

/// Interior dihedral angle along edge `e`, in `(0, 2π)`; reflex edges exceed `π`.
pub fn dihedral_angle(p: &Polyhedron, e: usize) -> Result<f64> {
    if e >= p.num_edges() {
        return Err(Error::NonManifoldEdge(e));
    }
    let [f, g] = p.edge_faces(e);
    let nf = p.halfspaces()[f].normal;
    let ng = p.halfspaces()[g].normal;
    // Face `f` traverses the stored direction of the edge.
    let dir = p.edge_vector(e).normalized();
    Ok(PI - math::atan2(nf.cross(ng).dot(dir), nf.dot(ng)))
}

pub fn exposure(p: &Polyhedron, v: usize) -> ExposureClass {
    let tol = TOL.angle;
    let mut all_convex = true;
    let mut all_reflex = true;
    for &e in p.vertex_edges(v) {
        let d = dihedral_angle(p, e).unwrap_or(PI);
        if !(d < PI - tol) {
            all_convex = false;
        }
        if !(d > PI + tol) {
            all_reflex = false;
        }
    }
    if all_convex {
        ExposureClass::Exposed
    } else if all_reflex {
        ExposureClass::NegativelyExposed
    } else {
        ExposureClass::Neither
    }
}

/// A face is exposed when every one of its vertices is.
pub fn face_exposed(p: &Polyhedron, f: usize, class: ExposureClass) -> bool {
    p.faces()[f].iter().all(|&v| exposure(p, v) == class)
}
