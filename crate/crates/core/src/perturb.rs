//! One-parameter deformations `P_t`, `t ≥ 0`, of a polyhedron and the
//! analytic one-sided derivatives of edge length, volume and the ratio
//! `M = E³/V` at `t = 0`.
//!
//! Edge-length rates are attributed to vertices. A vertex `H` of a moving
//! face with velocity `v_H` contributes `‖v_H‖ − ⟨v_H, u₁ + u₂⟩`, where `u₁`
//! and `u₂` are the unit directions from `H` along the two face edges.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gauss::{self, ExposureClass};
use crate::math::{self, Vec3};
use crate::poly::{HalfSpace, Polyhedron};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// The face plane moves (or tilts) away from the solid.
    Out,
    In,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Out => 1.0,
            Direction::In => -1.0,
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Out => Direction::In,
            Direction::In => Direction::Out,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Perturbation {
    /// Parallel translation of a face plane by `t`.
    FaceTranslate { face: usize, dir: Direction },
    /// Rotation of a face plane by angle `t` about one of its edges.
    FaceHinge { face: usize, edge: usize, dir: Direction },
    /// Cut by a plane normal to the incircle centre of the vertex's Gauss
    /// image, at depth `t` below the vertex.
    VertexTruncate { vertex: usize },
}

/// Analytic first-order report for one perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeReport {
    pub perturbation: Perturbation,
    pub e0: f64,
    pub v0: f64,
    pub m0: f64,
    pub de: f64,
    pub dv: f64,
    pub dm: f64,
    /// Edge-length rate contributed by each moving vertex, sorted by vertex.
    pub per_vertex_de: Vec<(usize, f64)>,
    pub fd: Option<FdSample>,
}

/// One-sided difference quotients at step `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdSample {
    pub h: f64,
    pub de: f64,
    pub dv: f64,
    pub dm: f64,
}

/// Velocities of the vertices that `vertex` becomes for small `t > 0`. A
/// vertex of degree `k` split by an inward move yields `k − 2` velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexVelocity {
    pub vertex: usize,
    pub v: Vec<Vec3>,
    pub u1: Vec3,
    pub u2: Vec3,
}

/// Cone of a polyhedron at a vertex `H` of a face `F`, as seen from the
/// side on which the vertex is locally convex.
///
/// With the faces around `H` listed as `F, G₁, …, G_{k−1}`: `normal` is the
/// normal of `F`, `first`/`last` those of `G₁`/`G_{k−1}`, `u1`/`u2` the unit
/// directions of the edges `F∩G₁` and `G_{k−1}∩F`, and `w[n]` the unit
/// direction of `G_{n+1}∩G_{n+2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCone {
    pub normal: Vec3,
    pub first: Vec3,
    pub last: Vec3,
    pub u1: Vec3,
    pub u2: Vec3,
    pub w: Vec<Vec3>,
}

impl LocalCone {
    /// Velocity of the vertex when `F` moves outward at unit speed: the new
    /// vertex slides along `G₁ ∩ G_{k−1}`.
    pub fn out_velocity(&self) -> Result<Vec3> {
        math::solve3(self.normal, self.first, self.last, [1.0, 0.0, 0.0], 1e-12)
            .ok_or(Error::DegenerateInput("face planes meet in a line".into()))
    }

    pub fn out_rate(&self) -> Result<f64> {
        let v = self.out_velocity()?;
        Ok(v.norm() - v.dot(self.u1 + self.u2))
    }

    /// Velocities of the `k − 2` vertices created when `F` moves inward at
    /// unit speed, one on each non-face edge.
    pub fn in_velocities(&self) -> Result<Vec<Vec3>> {
        self.w
            .iter()
            .map(|&w| {
                let s = -w.dot(self.normal);
                if !(s > 1e-12) {
                    return Err(Error::DegenerateInput("edge parallel to moving face".into()));
                }
                Ok(w / s)
            })
            .collect()
    }

    pub fn in_rate(&self) -> Result<f64> {
        let v = self.in_velocities()?;
        let n = v.len();
        let mut r = -v[0].dot(self.u1) - v[n - 1].dot(self.u2);
        for x in &v {
            r -= x.norm();
        }
        for i in 0..n.saturating_sub(1) {
            r += (v[i] - v[i + 1]).norm();
        }
        Ok(r)
    }

    pub fn rate(&self, dir: Direction) -> Result<f64> {
        match dir {
            Direction::Out => self.out_rate(),
            Direction::In => self.in_rate(),
        }
    }
}

/// Local cone at `vertex` of `face`. With `sigma = -1` all normals are
/// negated, which describes the complement of the polyhedron.
pub fn local_cone(p: &Polyhedron, face: usize, vertex: usize, sigma: f64) -> Result<LocalCone> {
    let star = gauss::vertex_star(p, vertex)?;
    let k = star.degree();
    let j = star.face_position(face).ok_or(Error::IndexOutOfRange {
        what: "face vertex",
        index: vertex,
    })?;
    let h = p.vertices()[vertex];
    let dir = |i: usize| (p.vertices()[star.neighbors[i % k]] - h).normalized();
    let normal = |i: usize| p.halfspaces()[star.faces[i % k]].normal * sigma;
    Ok(LocalCone {
        normal: normal(j),
        first: normal(j + 1),
        last: normal(j + k - 1),
        u1: dir(j),
        u2: dir(j + k - 1),
        w: (1..k - 1).map(|n| dir(j + n)).collect(),
    })
}

/// `+1` if every listed vertex is exposed, `-1` if every one is negatively
/// exposed.
fn side_of(p: &Polyhedron, vertices: impl Iterator<Item = usize>) -> Option<f64> {
    let mut side = None;
    for v in vertices {
        let s = match gauss::exposure(p, v) {
            ExposureClass::Exposed => 1.0,
            ExposureClass::NegativelyExposed => -1.0,
            ExposureClass::Neither => return None,
        };
        match side {
            None => side = Some(s),
            Some(t) if t != s => return None,
            _ => {}
        }
    }
    side
}

fn check_face(p: &Polyhedron, face: usize) -> Result<()> {
    if face >= p.num_faces() {
        return Err(Error::IndexOutOfRange {
            what: "face",
            index: face,
        });
    }
    Ok(())
}

/// Hinge geometry: endpoints on the hinge in face-cycle order and the unit
/// in-plane direction perpendicular to the hinge, pointing into the face.
fn hinge_frame(p: &Polyhedron, face: usize, edge: usize) -> Result<(usize, usize, Vec3)> {
    check_face(p, face)?;
    if edge >= p.num_edges() {
        return Err(Error::IndexOutOfRange {
            what: "edge",
            index: edge,
        });
    }
    let [f, g] = p.edge_faces(edge);
    let [x, y] = p.edges()[edge];
    let (a, b) = if f == face {
        (x, y)
    } else if g == face {
        (y, x)
    } else {
        return Err(Error::BadParameter(alloc::format!("edge {edge} is not on face {face}")));
    };
    let n = p.halfspaces()[face].normal;
    let pa = p.vertices()[a];
    let mut m = n.cross(p.vertices()[b] - pa).normalized();
    if (p.face_centroid(face) - pa).dot(m) < 0.0 {
        m = -m;
    }
    Ok((a, b, m))
}

/// `∫_F dist(x, hinge line) dA`.
fn hinge_moment(p: &Polyhedron, face: usize, a: usize, m: Vec3) -> f64 {
    let cyc = &p.faces()[face];
    let pa = p.vertices()[a];
    let c = p.face_centroid(face);
    let mut total = 0.0;
    for i in 0..cyc.len() {
        let x = p.vertices()[cyc[i]];
        let y = p.vertices()[cyc[(i + 1) % cyc.len()]];
        let area = 0.5 * (x - c).cross(y - c).norm();
        total += area * ((c + x + y) / 3.0 - pa).dot(m);
    }
    total
}

fn ratio_rate(e: f64, v: f64, de: f64, dv: f64) -> f64 {
    3.0 * e * e / v * de - e * e * e / (v * v) * dv
}

fn base_report(
    p: &Polyhedron,
    pert: Perturbation,
    de: f64,
    dv: f64,
    per: Vec<(usize, f64)>,
) -> Result<DerivativeReport> {
    let e0 = p.edge_length();
    let v0 = p.volume()?;
    let mut per_vertex_de = per;
    per_vertex_de.sort_by_key(|x| x.0);
    Ok(DerivativeReport {
        perturbation: pert,
        e0,
        v0,
        m0: e0 * e0 * e0 / v0,
        de,
        dv,
        dm: ratio_rate(e0, v0, de, dv),
        per_vertex_de,
        fd: None,
    })
}

/// Translation of `face` along its normal.
///
/// Requires every vertex of the face to be exposed, or every one to be
/// negatively exposed; in the latter case the formulas are applied to the
/// complement, where outward and inward swap.
pub fn face_translate_derivatives(p: &Polyhedron, face: usize, dir: Direction) -> Result<DerivativeReport> {
    check_face(p, face)?;
    let sigma = side_of(p, p.faces()[face].iter().copied()).ok_or(Error::NotExposedFace(face))?;
    let local = if sigma > 0.0 { dir } else { dir.flip() };
    let mut per = Vec::new();
    let mut de = 0.0;
    for &h in &p.faces()[face] {
        let r = local_cone(p, face, h, sigma)?.rate(local)?;
        de += r;
        per.push((h, r));
    }
    let dv = dir.sign() * p.face_area(face);
    base_report(p, Perturbation::FaceTranslate { face, dir }, de, dv, per)
}

/// Rotation of `face` about `edge` at unit angular speed.
///
/// A vertex at distance `s` from the hinge moves like a translated face
/// vertex with speed `s`; the hinge endpoints stay fixed to first order, so
/// they only need to be exposed on the same side as the rest when they are
/// part of a collapse, and are exempt here.
pub fn face_hinge_derivatives(p: &Polyhedron, face: usize, edge: usize, dir: Direction) -> Result<DerivativeReport> {
    let (a, b, m) = hinge_frame(p, face, edge)?;
    let movers: Vec<usize> = p.faces()[face].iter().copied().filter(|&v| v != a && v != b).collect();
    let sigma = side_of(p, movers.iter().copied()).ok_or(Error::NotSemiExposed(face))?;
    let local = if sigma > 0.0 { dir } else { dir.flip() };
    let pa = p.vertices()[a];
    let mut per = Vec::new();
    let mut de = 0.0;
    for &h in &movers {
        let s = (p.vertices()[h] - pa).dot(m);
        let r = s * local_cone(p, face, h, sigma)?.rate(local)?;
        de += r;
        per.push((h, r));
    }
    let dv = dir.sign() * hinge_moment(p, face, a, m);
    base_report(p, Perturbation::FaceHinge { face, edge, dir }, de, dv, per)
}

/// Incircle centre used as the cutting direction at `vertex`, together with
/// the exposure side.
pub fn truncation_axis(p: &Polyhedron, vertex: usize) -> Result<(Vec3, f64)> {
    if vertex >= p.num_vertices() {
        return Err(Error::IndexOutOfRange {
            what: "vertex",
            index: vertex,
        });
    }
    let (image, sigma) = match gauss::exposure(p, vertex) {
        ExposureClass::Exposed => (gauss::gauss_image(p, vertex)?, 1.0),
        ExposureClass::NegativelyExposed => (gauss::complement_gauss_image(p, vertex)?, -1.0),
        ExposureClass::Neither => return Err(Error::NotExposed(vertex)),
    };
    let inc = gauss::spherical_incircle(&image)?;
    Ok((inc.center, sigma))
}

/// Velocities of the new vertices on each incident edge, in star order,
/// when the cutting plane moves at unit speed.
pub fn truncation_velocities(p: &Polyhedron, vertex: usize) -> Result<Vec<Vec3>> {
    let (c, _) = truncation_axis(p, vertex)?;
    let star = gauss::vertex_star(p, vertex)?;
    let h = p.vertices()[vertex];
    star.neighbors
        .iter()
        .map(|&q| {
            let w = (p.vertices()[q] - h).normalized();
            let s = -w.dot(c);
            if !(s > 1e-12) {
                return Err(Error::NotExposed(vertex));
            }
            Ok(w / s)
        })
        .collect()
}

/// Cut of an exposed (or negatively exposed) vertex. The removed volume is
/// `O(t³)`, so only the edge length changes to first order.
pub fn vertex_truncate_derivatives(p: &Polyhedron, vertex: usize) -> Result<DerivativeReport> {
    let v = truncation_velocities(p, vertex)?;
    let k = v.len();
    let mut de = 0.0;
    for i in 0..k {
        de += (v[i] - v[(i + 1) % k]).norm() - v[i].norm();
    }
    base_report(
        p,
        Perturbation::VertexTruncate { vertex },
        de,
        0.0,
        alloc::vec![(vertex, de)],
    )
}

pub fn derivatives(p: &Polyhedron, pert: Perturbation) -> Result<DerivativeReport> {
    match pert {
        Perturbation::FaceTranslate { face, dir } => face_translate_derivatives(p, face, dir),
        Perturbation::FaceHinge { face, edge, dir } => face_hinge_derivatives(p, face, edge, dir),
        Perturbation::VertexTruncate { vertex } => vertex_truncate_derivatives(p, vertex),
    }
}

/// Analytic derivatives plus the one-sided difference quotient at step `h`.
pub fn derivatives_with_fd(p: &Polyhedron, pert: Perturbation, h: f64) -> Result<DerivativeReport> {
    let mut r = derivatives(p, pert)?;
    r.fd = Some(fd_sample(p, pert, h, r.e0, r.v0)?);
    Ok(r)
}

/// Vertex velocities of a face translation or hinge.
pub fn vertex_velocities(p: &Polyhedron, pert: Perturbation) -> Result<Vec<VertexVelocity>> {
    let (face, dir, movers, scale): (usize, Direction, Vec<usize>, Vec<f64>) = match pert {
        Perturbation::FaceTranslate { face, dir } => {
            check_face(p, face)?;
            let vs = p.faces()[face].clone();
            let n = vs.len();
            (face, dir, vs, alloc::vec![1.0; n])
        }
        Perturbation::FaceHinge { face, edge, dir } => {
            let (a, b, m) = hinge_frame(p, face, edge)?;
            let pa = p.vertices()[a];
            let vs: Vec<usize> = p.faces()[face].iter().copied().filter(|&v| v != a && v != b).collect();
            let s = vs.iter().map(|&v| (p.vertices()[v] - pa).dot(m)).collect();
            (face, dir, vs, s)
        }
        Perturbation::VertexTruncate { .. } => {
            return Err(Error::BadParameter("truncation has per-edge velocities".into()))
        }
    };
    let sigma = side_of(p, movers.iter().copied()).ok_or(Error::NotExposedFace(face))?;
    let local = if sigma > 0.0 { dir } else { dir.flip() };
    movers
        .iter()
        .zip(scale)
        .map(|(&h, s)| {
            let cone = local_cone(p, face, h, sigma)?;
            let v = match local {
                Direction::Out => alloc::vec![cone.out_velocity()?],
                Direction::In => cone.in_velocities()?,
            };
            Ok(VertexVelocity {
                vertex: h,
                v: v.into_iter().map(|x| x * s).collect(),
                u1: cone.u1,
                u2: cone.u2,
            })
        })
        .collect()
}

/// Builds `P_t`.
///
/// Face moves on convex polyhedra modify one halfspace and rebuild.
/// Truncation of a convex polyhedron adds a halfspace; on a non-convex
/// polyhedron the vertex is cut out of the mesh directly. A change of the
/// face lattice between `t/100` and `t` is reported as a collapse.
pub fn apply(p: &Polyhedron, pert: Perturbation, t: f64) -> Result<Polyhedron> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::BadParameter(alloc::format!("t = {t}")));
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    match pert {
        Perturbation::VertexTruncate { vertex } if !p.is_convex() => truncate_mesh(p, vertex, t),
        _ => {
            if !p.is_convex() {
                return Err(Error::NotConvex);
            }
            let expected = match pert {
                Perturbation::VertexTruncate { .. } => p.num_faces() + 1,
                _ => p.num_faces(),
            };
            let q = rebuild(p, pert, t, expected)?;
            let r = rebuild(p, pert, t * 1e-2, expected)?;
            if q.combinatorial_signature() != r.combinatorial_signature() {
                return Err(Error::CombinatorialCollapse);
            }
            Ok(q)
        }
    }
}

fn rebuild(p: &Polyhedron, pert: Perturbation, t: f64, expected: usize) -> Result<Polyhedron> {
    let mut hs: Vec<HalfSpace> = p.halfspaces().to_vec();
    match pert {
        Perturbation::FaceTranslate { face, dir } => {
            check_face(p, face)?;
            hs[face].offset += dir.sign() * t;
        }
        Perturbation::FaceHinge { face, edge, dir } => {
            let (a, _, m) = hinge_frame(p, face, edge)?;
            let n = hs[face].normal;
            let ang = dir.sign() * t;
            let nt = (n * math::cos(ang) - m * math::sin(ang)).normalized();
            hs[face] = HalfSpace::through(nt, p.vertices()[a]);
        }
        Perturbation::VertexTruncate { vertex } => {
            let (c, _) = truncation_axis(p, vertex)?;
            hs.push(HalfSpace::new(c, p.vertices()[vertex].dot(c) - t));
        }
    }
    let q = Polyhedron::from_halfspaces_report(&hs).map_err(|e| match e {
        Error::EmptyInterior | Error::DegenerateInput(_) => Error::CombinatorialCollapse,
        other => other,
    })?;
    if q.polyhedron.num_faces() != expected || !q.dropped.is_empty() {
        return Err(Error::CombinatorialCollapse);
    }
    Ok(q.polyhedron)
}

/// Replaces `vertex` by one new vertex on each incident edge and closes the
/// hole with a new face.
fn truncate_mesh(p: &Polyhedron, vertex: usize, t: f64) -> Result<Polyhedron> {
    let vel = truncation_velocities(p, vertex)?;
    let star = gauss::vertex_star(p, vertex)?;
    let k = star.degree();
    let h = p.vertices()[vertex];
    for (i, v) in vel.iter().enumerate() {
        let len = p.vertices()[star.neighbors[i]].dist(h);
        if t * v.norm() >= 0.5 * len {
            return Err(Error::CombinatorialCollapse);
        }
    }
    let mut vertices = p.vertices().to_vec();
    let mut ids = Vec::with_capacity(k);
    for (i, v) in vel.iter().enumerate() {
        let x = h + *v * t;
        if i == 0 {
            vertices[vertex] = x;
            ids.push(vertex);
        } else {
            ids.push(vertices.len());
            vertices.push(x);
        }
    }
    let mut faces: Vec<Vec<usize>> = p.faces().to_vec();
    for (i, &f) in star.faces.iter().enumerate() {
        let cyc = &faces[f];
        let pos = cyc.iter().position(|&x| x == vertex).expect("vertex on face");
        let mut new = Vec::with_capacity(cyc.len() + 1);
        for (j, &x) in cyc.iter().enumerate() {
            if j == pos {
                new.push(ids[i]);
                new.push(ids[(i + k - 1) % k]);
            } else {
                new.push(x);
            }
        }
        faces[f] = new;
    }
    faces.push(ids);
    Polyhedron::from_mesh(vertices, faces)
}

fn fd_sample(p: &Polyhedron, pert: Perturbation, h: f64, e0: f64, v0: f64) -> Result<FdSample> {
    let q = apply(p, pert, h)?;
    let e = q.edge_length();
    let v = q.volume()?;
    let m0 = e0 * e0 * e0 / v0;
    Ok(FdSample {
        h,
        de: (e - e0) / h,
        dv: (v - v0) / h,
        dm: (e * e * e / v - m0) / h,
    })
}

/// Default step sequence `{1e-3, 1e-4, 1e-5} × diameter`.
pub fn default_fd_steps(p: &Polyhedron) -> Vec<f64> {
    let d = p.diameter();
    alloc::vec![1e-3 * d, 1e-4 * d, 1e-5 * d]
}

/// Finite-difference convergence study of one perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct FdCheck {
    pub report: DerivativeReport,
    pub samples: Vec<FdSample>,
    /// Least-squares slope of `log|fd − d|` against `log h` for `E`, `V`
    /// and `M`; `None` when the errors stay at rounding level.
    pub order: [Option<f64>; 3],
    /// Slope between the two finest steps above rounding level.
    pub asymptotic_order: [Option<f64>; 3],
    pub passed: bool,
}

/// Compares analytic derivatives against one-sided differences at each step
/// in `steps`, ordered from coarse to fine. Passes when the errors above
/// rounding level shrink at an observed order of at least 0.9, either over
/// all steps or between the two finest ones (a second-order term can mask
/// the first-order trend at the coarsest step).
pub fn finite_difference_check(p: &Polyhedron, pert: Perturbation, steps: &[f64]) -> Result<FdCheck> {
    let report = derivatives(p, pert)?;
    let mut samples = Vec::with_capacity(steps.len());
    for &h in steps {
        samples.push(fd_sample(p, pert, h, report.e0, report.v0)?);
    }
    let analytic = [report.de, report.dv, report.dm];
    let scale = [report.e0, report.v0, report.m0];
    let mut order = [None; 3];
    let mut asymptotic_order = [None; 3];
    let mut passed = true;
    for q in 0..3 {
        let pts: Vec<(f64, f64, f64)> = samples
            .iter()
            .map(|s| {
                let fd = [s.de, s.dv, s.dm][q];
                let floor = 1e-9 * (1.0 + analytic[q].abs()) + 1e2 * f64::EPSILON * scale[q].abs() / s.h;
                (s.h, (fd - analytic[q]).abs(), floor)
            })
            .collect();
        let above: Vec<(f64, f64)> = pts.iter().filter(|x| x.1 > x.2).map(|x| (x.0, x.1)).collect();
        if above.len() >= 2 {
            order[q] = Some(log_slope(&above));
            let fine = &above[above.len() - 2..];
            let local = log_slope(fine);
            asymptotic_order[q] = Some(local);
            if order[q].is_some_and(|o| o < 0.9) && local < 0.9 {
                passed = false;
            }
        }
    }
    Ok(FdCheck {
        report,
        samples,
        order,
        asymptotic_order,
        passed,
    })
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| math::ln(p.0)).collect();
    let ys: Vec<f64> = pts.iter().map(|p| math::ln(p.1)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..pts.len() {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    sxy / sxx
}

/// Every face translation, hinge and vertex truncation whose derivative is
/// defined on `p`.
pub fn all_perturbations(p: &Polyhedron) -> Vec<Perturbation> {
    let mut out = Vec::new();
    for face in 0..p.num_faces() {
        for dir in [Direction::Out, Direction::In] {
            out.push(Perturbation::FaceTranslate { face, dir });
        }
    }
    for face in 0..p.num_faces() {
        for edge in p.face_edges(face) {
            for dir in [Direction::Out, Direction::In] {
                out.push(Perturbation::FaceHinge { face, edge, dir });
            }
        }
    }
    for vertex in 0..p.num_vertices() {
        out.push(Perturbation::VertexTruncate { vertex });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Shape;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(s: Shape) -> Polyhedron {
        Polyhedron::canonical(s).unwrap()
    }

    #[test]
    fn cube_translation_is_stationary() {
        let p = shape(Shape::Cube);
        for face in 0..6 {
            let r = face_translate_derivatives(&p, face, Direction::Out).unwrap();
            assert!((r.de - 4.0).abs() < 1e-12);
            assert!((r.dv - 1.0).abs() < 1e-12);
            assert!(r.dm.abs() < 1e-8);
            let r = face_translate_derivatives(&p, face, Direction::In).unwrap();
            assert!((r.de + 4.0).abs() < 1e-12);
            assert!(r.dm.abs() < 1e-8);
        }
    }

    #[test]
    fn report_identities() {
        let p = shape(Shape::OptimalPrism);
        for pert in all_perturbations(&p) {
            let r = derivatives(&p, pert).unwrap();
            assert!((r.m0 - r.e0.powi(3) / r.v0).abs() < 1e-12 * r.m0);
            let dm = 3.0 * r.e0 * r.e0 / r.v0 * r.de - r.e0.powi(3) / (r.v0 * r.v0) * r.dv;
            assert!((r.dm - dm).abs() <= 1e-12 * (1.0 + dm.abs()));
            let sum: f64 = r.per_vertex_de.iter().map(|x| x.1).sum();
            assert!((sum - r.de).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_cube_translate_gives_box() {
        let p = shape(Shape::Cube);
        let top = (0..6).find(|&f| p.halfspaces()[f].normal.z() > 0.5).unwrap();
        let q = apply(
            &p,
            Perturbation::FaceTranslate {
                face: top,
                dir: Direction::Out,
            },
            0.5,
        )
        .unwrap();
        assert!((q.volume().unwrap() - 1.5).abs() < 1e-12);
        assert!((q.edge_length() - 14.0).abs() < 1e-12);
    }

    #[test]
    fn apply_cube_truncate_cuts_equal_lengths() {
        let p = shape(Shape::Cube);
        let t = 0.05;
        let q = apply(&p, Perturbation::VertexTruncate { vertex: 0 }, t).unwrap();
        assert_eq!(q.num_faces(), 7);
        let h = p.vertices()[0];
        let new: Vec<Vec3> = q.vertices().iter().copied().filter(|x| x.dist(h) < 0.2).collect();
        assert_eq!(new.len(), 3);
        for x in new {
            assert!((x.dist(h) - t * math::sqrt(3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_truncation_rate() {
        let p = shape(Shape::Cube);
        let r = vertex_truncate_derivatives(&p, 3).unwrap();
        let expect = 3.0 * math::sqrt(6.0) - 3.0 * math::sqrt(3.0);
        assert!((r.de - expect).abs() < 1e-12);
        assert_eq!(r.dv, 0.0);
        let v = truncation_velocities(&p, 3).unwrap();
        assert!(v.iter().all(|x| (x.norm() - math::sqrt(3.0)).abs() < 1e-12));
    }

    #[test]
    fn tetrahedron_translation_is_similarity() {
        let p = shape(Shape::RegularTetrahedron);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = sample::jitter(&mut rng, &p, 0.2).unwrap();
        for face in 0..4 {
            for dir in [Direction::Out, Direction::In] {
                let r = face_translate_derivatives(&q, face, dir).unwrap();
                assert!(r.dm.abs() < 1e-10 * r.m0, "{}", r.dm);
            }
            let m0 = q.melzak_ratio().unwrap();
            let moved = apply(
                &q,
                Perturbation::FaceTranslate {
                    face,
                    dir: Direction::Out,
                },
                0.1,
            )
            .unwrap();
            assert!((moved.melzak_ratio().unwrap() - m0).abs() < 1e-10 * m0);
        }
    }

    #[test]
    fn prism_is_critical_for_translations() {
        let p = shape(Shape::OptimalPrism);
        for face in 0..5 {
            for dir in [Direction::Out, Direction::In] {
                let r = face_translate_derivatives(&p, face, dir).unwrap();
                assert!(r.dm.abs() < 1e-8, "face {face} {dir:?}: {}", r.dm);
            }
        }
    }

    #[test]
    fn cube_hinge_volume_moment() {
        let p = shape(Shape::Cube);
        for face in 0..6 {
            for edge in p.face_edges(face) {
                let r = face_hinge_derivatives(&p, face, edge, Direction::Out).unwrap();
                assert!((r.dv - 0.5).abs() < 1e-12);
                let c = finite_difference_check(&p, r.perturbation, &default_fd_steps(&p)).unwrap();
                assert!(c.passed, "{c:?}");
                assert!((c.samples[2].de - r.de).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn tetrahedron_hinges_are_not_improving_both_ways() {
        let p = shape(Shape::RegularTetrahedron);
        for face in 0..4 {
            for edge in p.face_edges(face) {
                let out = face_hinge_derivatives(&p, face, edge, Direction::Out).unwrap().dm;
                let inn = face_hinge_derivatives(&p, face, edge, Direction::In).unwrap().dm;
                assert!(out.min(inn) <= 1e-8);
                assert!(out.abs() < 1e-8 && inn.abs() < 1e-8, "{out} {inn}");
            }
        }
    }

    #[test]
    fn needle_pyramid_apex_truncation_improves() {
        let p = shape(Shape::NgonPyramid {
            n: 6,
            base_radius: 0.1,
            height: 1.0,
        });
        let apex = (0..p.num_vertices()).find(|&v| p.degree(v) == 6).unwrap();
        let r = vertex_truncate_derivatives(&p, apex).unwrap();
        assert!(r.de < 0.0 && r.dm < 0.0);
        let c = finite_difference_check(&p, r.perturbation, &default_fd_steps(&p)).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn tetrahedron_truncation_is_neutral() {
        // The cut triangle at depth t has the same side as the removed edge
        // pieces, so the first-order change vanishes.
        let p = shape(Shape::RegularTetrahedron);
        for v in 0..4 {
            let c =
                finite_difference_check(&p, Perturbation::VertexTruncate { vertex: v }, &default_fd_steps(&p)).unwrap();
            assert!(c.report.de.abs() < 1e-12);
            assert!(c.passed);
        }
    }

    #[test]
    fn cube_truncation_volume_is_higher_order() {
        let p = shape(Shape::Cube);
        let c = finite_difference_check(&p, Perturbation::VertexTruncate { vertex: 0 }, &default_fd_steps(&p)).unwrap();
        for s in &c.samples {
            assert!(s.dv.abs() / s.h < 10.0);
        }
    }

    #[test]
    fn degree_three_faces_are_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = sample::random_simple(&mut rng, 7).unwrap();
            for face in 0..p.num_faces() {
                let o = face_translate_derivatives(&p, face, Direction::Out).unwrap();
                let i = face_translate_derivatives(&p, face, Direction::In).unwrap();
                assert!((o.de + i.de).abs() < 1e-9);
                assert!((o.dv + i.dv).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn high_degree_vertex_is_strictly_worse_inward() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 4..9 {
            let p = sample::random_pyramid(&mut rng, n).unwrap();
            let apex = (0..p.num_vertices()).find(|&v| p.degree(v) == n).unwrap();
            for face in p.vertex_faces(apex) {
                let cone = local_cone(&p, face, apex, 1.0).unwrap();
                let gap = -cone.in_rate().unwrap() - cone.out_rate().unwrap();
                assert!(gap > 1e-6, "n={n} gap={gap}");
            }
        }
    }

    #[test]
    fn velocities_match_displacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = sample::random_simple(&mut rng, 8).unwrap();
        let t = 1e-7;
        for face in 0..p.num_faces() {
            for dir in [Direction::Out, Direction::In] {
                let pert = Perturbation::FaceTranslate { face, dir };
                let q = apply(&p, pert, t).unwrap();
                for vel in vertex_velocities(&p, pert).unwrap() {
                    let moved = p.vertices()[vel.vertex] + vel.v[0] * t;
                    let nearest = q.vertices().iter().map(|x| x.dist(moved)).fold(f64::INFINITY, f64::min);
                    assert!(nearest / t < 1e-6, "{}", nearest / t);
                    assert!((vel.u1.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pyramid_translations_split_apex() {
        let p = shape(Shape::NgonPyramid {
            n: 4,
            base_radius: 1.0,
            height: 1.0,
        });
        let apex = (0..5).find(|&v| p.degree(v) == 4).unwrap();
        let face = p.vertex_faces(apex)[0];
        for dir in [Direction::Out, Direction::In] {
            let pert = Perturbation::FaceTranslate { face, dir };
            let q = apply(&p, pert, 1e-3).unwrap();
            assert_eq!(q.num_vertices(), 6);
            let c = finite_difference_check(&p, pert, &default_fd_steps(&p)).unwrap();
            assert!(c.passed, "{dir:?} {c:?}");
        }
    }

    #[test]
    fn random_polyhedra_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..4 {
            let p = sample::random_convex(&mut rng, 9).unwrap();
            let steps = default_fd_steps(&p);
            for pert in all_perturbations(&p) {
                match finite_difference_check(&p, pert, &steps) {
                    Ok(c) => assert!(c.passed, "{pert:?} {:?} {:?}", c.report, c.samples),
                    Err(Error::CombinatorialCollapse) => {}
                    Err(e) => panic!("{pert:?}: {e}"),
                }
            }
        }
    }

    #[test]
    fn collapse_and_argument_errors() {
        let p = shape(Shape::Cube);
        let pert = Perturbation::FaceTranslate {
            face: 0,
            dir: Direction::In,
        };
        assert_eq!(apply(&p, pert, 1.5).unwrap_err(), Error::CombinatorialCollapse);
        assert!(matches!(apply(&p, pert, -1.0), Err(Error::BadParameter(_))));
        assert!(matches!(
            face_hinge_derivatives(
                &p,
                0,
                p.face_edges(1)
                    .into_iter()
                    .find(|e| !p.face_edges(0).contains(e))
                    .unwrap(),
                Direction::Out
            ),
            Err(Error::BadParameter(_))
        ));
    }
}
