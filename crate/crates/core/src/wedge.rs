//! Quadrilateral faces: the wedge that appears when a quadrilateral face's
//! halfspace is dropped, its first-order hinge condition, and the planar
//! limit of that condition on degenerate pyramids.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gauss;
use crate::math::{self, Vec3, PI};
use crate::poly::{HalfSpace, Polyhedron};

/// Region above a quadrilateral base bounded by the four planes adjacent to
/// it.
#[derive(Clone, Debug)]
pub struct Wedge {
    /// Base corners, counter-clockwise seen from the wedge side.
    pub base: [Vec3; 4],
    /// Unit normal of the base plane pointing into the wedge.
    pub normal: Vec3,
    /// Top vertices: one for a pyramid, two for a ridge.
    pub apex: Vec<Vec3>,
    pub height: f64,
    /// Longest base edge scaled to 1.
    pub normalized: bool,
    solid: Polyhedron,
}

impl Wedge {
    /// Wedge over `base` bounded by `sides[i]`, the plane through base edge
    /// `i → i+1`.
    pub fn from_planes(base: [Vec3; 4], normal: Vec3, sides: [HalfSpace; 4]) -> Result<Wedge> {
        let normal = normal.normalized();
        let mut hs = alloc::vec![HalfSpace::through(-normal, base[0])];
        hs.extend_from_slice(&sides);
        let solid = match Polyhedron::from_halfspaces(&hs) {
            Ok(p) => p,
            Err(Error::UnboundedIntersection) => return Err(Error::UnboundedWedge),
            Err(e) => return Err(e),
        };
        if solid.num_faces() != 5 || solid.faces()[0].len() != 4 {
            return Err(Error::UnboundedWedge);
        }
        Self::from_solid(base, normal, solid)
    }

    /// Wedge over `base` whose side over edge `i` makes the angle `tilts[i]`
    /// with the base.
    pub fn over_base(base: [Vec3; 4], normal: Vec3, tilts: [f64; 4]) -> Result<Wedge> {
        let n = normal.normalized();
        let sides = side_planes(&base, n, &tilts);
        Self::from_planes(base, n, sides)
    }

    fn from_solid(base: [Vec3; 4], normal: Vec3, solid: Polyhedron) -> Result<Wedge> {
        let tol = 1e-9 * solid.diameter();
        let apex: Vec<Vec3> = solid
            .vertices()
            .iter()
            .copied()
            .filter(|&x| (x - base[0]).dot(normal) > tol)
            .collect();
        if apex.is_empty() || apex.len() > 2 {
            return Err(Error::DegenerateEdge);
        }
        let height = apex.iter().map(|&x| (x - base[0]).dot(normal)).fold(0.0, f64::max);
        Ok(Wedge {
            base,
            normal,
            apex,
            height,
            normalized: false,
            solid,
        })
    }

    /// The wedge as a polyhedron; face 0 is the base.
    pub fn solid(&self) -> &Polyhedron {
        &self.solid
    }

    pub fn is_pyramid(&self) -> bool {
        self.apex.len() == 1
    }

    pub fn base_edge_lengths(&self) -> [f64; 4] {
        core::array::from_fn(|i| self.base[i].dist(self.base[(i + 1) % 4]))
    }

    /// Copy scaled so that the longest base edge has length 1.
    pub fn normalize(&self) -> Wedge {
        let s = 1.0 / self.base_edge_lengths().into_iter().fold(0.0, f64::max);
        Wedge {
            base: self.base.map(|x| x * s),
            normal: self.normal,
            apex: self.apex.iter().map(|&x| x * s).collect(),
            height: self.height * s,
            normalized: true,
            solid: self.solid.scaled(s),
        }
    }

    /// Unit vector in the base plane, perpendicular to edge `i` and pointing
    /// into the base.
    fn inward(&self, i: usize) -> Vec3 {
        self.normal.cross(self.base[(i + 1) % 4] - self.base[i]).normalized()
    }

    /// Interior dihedral angle between the base and the side over each edge.
    pub fn base_dihedrals(&self) -> [f64; 4] {
        core::array::from_fn(|i| {
            let m = self.inward(i);
            self.apex
                .iter()
                .map(|&q| {
                    let r = q - self.base[i];
                    math::atan2(r.dot(self.normal), r.dot(m))
                })
                .fold(f64::INFINITY, f64::min)
        })
    }

    /// Interior angles of the base quadrilateral.
    pub fn base_angles(&self) -> [f64; 4] {
        core::array::from_fn(|i| {
            let x = self.base[i];
            (self.base[(i + 3) % 4] - x).angle(self.base[(i + 1) % 4] - x)
        })
    }

    /// Largest deviation of a base angle from a right angle.
    pub fn rectangle_deviation(&self) -> f64 {
        self.base_angles()
            .iter()
            .map(|a| (a - PI / 2.0).abs())
            .fold(0.0, f64::max)
    }

    fn solid_vertex(&self, x: Vec3) -> Option<usize> {
        let tol = 1e-9 * self.solid.diameter();
        self.solid.vertices().iter().position(|&y| y.dist(x) <= tol)
    }
}

fn side_planes(base: &[Vec3; 4], n: Vec3, tilts: &[f64; 4]) -> [HalfSpace; 4] {
    core::array::from_fn(|i| {
        let m = n.cross(base[(i + 1) % 4] - base[i]).normalized();
        let outward = -m * math::sin(tilts[i]) + n * math::cos(tilts[i]);
        HalfSpace::through(outward, base[i])
    })
}

/// The wedge added to `p` when the halfspace of quadrilateral face `face` is
/// removed, cut from the four neighbouring halfspaces.
pub fn protruding_wedge(p: &Polyhedron, face: usize) -> Result<Wedge> {
    if !p.is_convex() {
        return Err(Error::NotConvex);
    }
    if face >= p.num_faces() {
        return Err(Error::IndexOutOfRange {
            what: "face",
            index: face,
        });
    }
    let cyc = &p.faces()[face];
    if cyc.len() != 4 {
        return Err(Error::NotQuadrilateral(face));
    }
    let base: [Vec3; 4] = core::array::from_fn(|i| p.vertices()[cyc[i]]);
    let sides: [HalfSpace; 4] = core::array::from_fn(|i| {
        let e = p.find_edge(cyc[i], cyc[(i + 1) % 4]).expect("face cycle edge");
        let [f, g] = p.edge_faces(e);
        p.halfspaces()[if f == face { g } else { f }]
    });
    Wedge::from_planes(base, p.halfspaces()[face].normal, sides)
}

/// Convex host polyhedron whose top face is the rectangle `[-a,a]×[-b,b]` at
/// `z = 0`, with sides leaning inward at `tilts` above it and a bottom at
/// `z = -depth`. Returns the host and the index of the top face.
pub fn rectangle_host(a: f64, b: f64, tilts: [f64; 4], depth: f64) -> Result<(Polyhedron, usize)> {
    let base = [
        Vec3::new(-a, -b, 0.0),
        Vec3::new(a, -b, 0.0),
        Vec3::new(a, b, 0.0),
        Vec3::new(-a, b, 0.0),
    ];
    host_over(base, tilts, depth)
}

/// Host polyhedron over a convex counter-clockwise quadrilateral in the
/// plane `z = 0`.
pub fn host_over(base: [Vec3; 4], tilts: [f64; 4], depth: f64) -> Result<(Polyhedron, usize)> {
    let mut hs = alloc::vec![HalfSpace::new(Vec3::Z, 0.0), HalfSpace::new(-Vec3::Z, depth)];
    hs.extend_from_slice(&side_planes(&base, Vec3::Z, &tilts));
    let p = Polyhedron::from_halfspaces(&hs)?;
    if p.num_faces() != 6 || p.faces()[0].len() != 4 {
        return Err(Error::DegenerateInput("host does not keep all six faces".into()));
    }
    Ok((p, 0))
}

/// Acute base dihedrals over a rectangular base.
pub fn is_good_wedge(w: &Wedge) -> bool {
    w.base_dihedrals().iter().all(|&d| d < PI / 2.0 - 1e-9) && w.rectangle_deviation() <= 1e-6
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopCurvature {
    pub deficits: Vec<f64>,
    pub min: f64,
    /// Single top vertex; `min` is the apex deficit.
    pub pyramid_apex: bool,
}

/// Angle deficits at the top vertices of the wedge.
pub fn wedge_top_curvature(w: &Wedge) -> Result<TopCurvature> {
    let deficits = w
        .apex
        .iter()
        .map(|&x| {
            w.solid_vertex(x)
                .map(|v| gauss::angle_deficit(&w.solid, v))
                .ok_or(Error::DegenerateEdge)
        })
        .collect::<Result<Vec<f64>>>()?;
    let min = deficits.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TopCurvature {
        deficits,
        min,
        pyramid_apex: w.is_pyramid(),
    })
}

/// Edge-length rate of the base face hinged outward about base edge
/// `edge` (from corner `edge` to corner `edge + 1`) at unit angular speed.
/// The two other corners slide up their side edges; corner `H` at distance
/// `s` from the hinge moves with `v = s·d/⟨d, n⟩`, `d` its side edge, and
/// contributes `‖v‖ − ⟨v, u₁ + u₂⟩` with `u` the unit base edges at `H`.
pub fn wedge_r(w: &Wedge, edge: usize) -> Result<f64> {
    if edge >= 4 {
        return Err(Error::IndexOutOfRange {
            what: "base edge",
            index: edge,
        });
    }
    let m = w.inward(edge);
    let hinge = w.base[edge];
    let mut r = 0.0;
    for k in [(edge + 2) % 4, (edge + 3) % 4] {
        let h = w.base[k];
        let v_idx = w.solid_vertex(h).ok_or(Error::DegenerateEdge)?;
        let up = w
            .solid
            .vertex_edges(v_idx)
            .iter()
            .map(|&e| w.solid.vertices()[w.solid.other_end(e, v_idx)] - h)
            .find(|d| d.dot(w.normal) > 1e-12 * w.solid.diameter())
            .ok_or(Error::DegenerateEdge)?;
        let v = up * ((h - hinge).dot(m) / up.dot(w.normal));
        let u1 = (w.base[(k + 1) % 4] - h).normalized();
        let u2 = (w.base[(k + 3) % 4] - h).normalized();
        r += v.norm() - v.dot(u1 + u2);
    }
    Ok(r)
}

/// Four planar points with the apex of a flattened pyramid at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PyramidQuad {
    pub p: [[f64; 2]; 4],
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm2(a: [f64; 2]) -> f64 {
    math::sqrt(dot2(a, a))
}

impl PyramidQuad {
    pub fn new(p: [[f64; 2]; 4]) -> Result<PyramidQuad> {
        let q = PyramidQuad { p };
        if p.iter().any(|x| !(norm2(*x) > 0.0)) || (0..4).any(|i| norm2(sub2(p[(i + 1) % 4], p[i])) == 0.0) {
            return Err(Error::CoincidentPoints);
        }
        if !q.is_simple() {
            return Err(Error::DegenerateInput("self-intersecting quadrilateral".into()));
        }
        Ok(q)
    }

    pub fn from_flat(x: [f64; 8]) -> Result<PyramidQuad> {
        PyramidQuad::new(core::array::from_fn(|i| [x[2 * i], x[2 * i + 1]]))
    }

    pub fn flat(&self) -> [f64; 8] {
        core::array::from_fn(|i| self.p[i / 2][i % 2])
    }

    pub fn is_simple(&self) -> bool {
        let p = &self.p;
        let crosses = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]| {
            let o1 = cross2(sub2(b, a), sub2(c, a));
            let o2 = cross2(sub2(b, a), sub2(d, a));
            let o3 = cross2(sub2(d, c), sub2(a, c));
            let o4 = cross2(sub2(d, c), sub2(b, c));
            o1 * o2 < 0.0 && o3 * o4 < 0.0
        };
        !crosses(p[0], p[1], p[2], p[3]) && !crosses(p[1], p[2], p[3], p[0])
    }

    /// Convex, counter-clockwise and containing the origin strictly inside.
    pub fn is_admissible(&self) -> bool {
        self.margin() > 0.0
    }

    /// Smallest of: side lengths, interior angles and distances from the
    /// origin to the sides, all relative to the longest side. Negative when
    /// the quadrilateral is not convex or misses the origin.
    pub fn margin(&self) -> f64 {
        let sides: [[f64; 2]; 4] = core::array::from_fn(|i| sub2(self.p[(i + 1) % 4], self.p[i]));
        let longest = sides.iter().map(|s| norm2(*s)).fold(0.0, f64::max);
        let mut m = f64::INFINITY;
        for i in 0..4 {
            let (s, t) = (sides[i], sides[(i + 1) % 4]);
            let ls = norm2(s);
            m = m.min(ls / longest);
            m = m.min(math::atan2(cross2(s, t), dot2(s, t)).min(PI - math::atan2(cross2(s, t), dot2(s, t))));
            m = m.min(cross2(s, sub2([0.0, 0.0], self.p[i])) / (ls * longest));
        }
        m
    }

    /// Rotated so that `p₁` lies on the positive x-axis and scaled so that the
    /// longest side has length 1.
    pub fn gauge(&self) -> PyramidQuad {
        let longest = (0..4)
            .map(|i| norm2(sub2(self.p[(i + 1) % 4], self.p[i])))
            .fold(0.0, f64::max);
        let r = norm2(self.p[0]);
        let (c, s) = (self.p[0][0] / r, self.p[0][1] / r);
        PyramidQuad {
            p: self
                .p
                .map(|x| [(c * x[0] + s * x[1]) / longest, (-s * x[0] + c * x[1]) / longest]),
        }
    }

    /// Interior angles at each corner.
    pub fn angles(&self) -> [f64; 4] {
        core::array::from_fn(|i| {
            let a = sub2(self.p[(i + 3) % 4], self.p[i]);
            let b = sub2(self.p[(i + 1) % 4], self.p[i]);
            math::acos((dot2(a, b) / (norm2(a) * norm2(b))).clamp(-1.0, 1.0))
        })
    }
}

/// `F(i) = |pᵢ|(1 − ⟨pᵢ − pᵢ₊₁, pᵢ⟩/(|pᵢ||pᵢ₊₁ − pᵢ|) − ⟨pᵢ − pᵢ₋₁, pᵢ⟩/(|pᵢ||pᵢ₋₁ − pᵢ|))`
/// with cyclic indices.
#[allow(clippy::needless_range_loop)]
pub fn pyramid_f(q: &PyramidQuad) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let p = q.p[i];
        let next = sub2(p, q.p[(i + 1) % 4]);
        let prev = sub2(p, q.p[(i + 3) % 4]);
        let (np, nn, nv) = (norm2(p), norm2(next), norm2(prev));
        if np == 0.0 || nn == 0.0 || nv == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        out[i] = np * (1.0 - dot2(next, p) / (np * nn) - dot2(prev, p) / (np * nv));
    }
    Ok(out)
}

/// Limit of `h · wedge_r` for the pyramid over `q` with apex at height `h`
/// above the origin, as `h → 0`: the moving corners' `F` values weighted by
/// their distance from the hinge.
pub fn pyramid_r_limit(q: &PyramidQuad, edge: usize) -> Result<f64> {
    let f = pyramid_f(q)?;
    let a = q.p[edge];
    let t = sub2(q.p[(edge + 1) % 4], a);
    let len = norm2(t);
    Ok([(edge + 2) % 4, (edge + 3) % 4]
        .iter()
        .map(|&k| cross2(t, sub2(q.p[k], a)).abs() / len * f[k])
        .sum())
}

/// `(F₁ + F₂, F₂ + F₃, F₃ + F₄)`, zero exactly when `F₁ = −F₂ = F₃ = −F₄`.
pub fn chain_residuals(f: &[f64; 4]) -> [f64; 3] {
    [f[0] + f[1], f[1] + f[2], f[2] + f[3]]
}

fn residual_of(x: &[f64; 8]) -> Option<(f64, [f64; 3], PyramidQuad)> {
    let q = PyramidQuad::from_flat(*x).ok()?;
    if !(q.margin() >= SCAN_MARGIN) {
        return None;
    }
    let g = q.gauge();
    let r = chain_residuals(&pyramid_f(&g).ok()?);
    let n = math::sqrt(r.iter().map(|v| v * v).sum());
    n.is_finite().then_some((n, r, g))
}

/// Levenberg–Marquardt from `start`, then, if that stalls, coordinate
/// pattern search for `iterations` sweeps followed by the same polish. Every
/// iterate stays admissible. Returns the gauged quad and its residual.
pub fn descend(start: &PyramidQuad, iterations: usize) -> Result<(PyramidQuad, f64)> {
    let x0 = start.gauge().flat();
    if residual_of(&x0).is_none() {
        return Err(Error::InvalidStart("inadmissible quadrilateral".into()));
    }
    let direct = polish(x0);
    if direct.1 < 1e-15 {
        return Ok((direct.0, direct.1));
    }
    let searched = polish(pattern_search(x0, iterations));
    let best = if searched.1 < direct.1 { searched } else { direct };
    Ok((best.0, best.1))
}

fn pattern_search(mut x: [f64; 8], iterations: usize) -> [f64; 8] {
    let Some((mut best, _, _)) = residual_of(&x) else {
        return x;
    };
    let mut step = 0.1;
    for _ in 0..iterations {
        let mut improved = false;
        for c in 0..8 {
            for s in [step, -step] {
                let mut y = x;
                y[c] += s;
                if let Some((r, _, _)) = residual_of(&y) {
                    if r < best {
                        best = r;
                        x = y;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    x
}

/// Damped minimum-norm Gauss–Newton steps with a forward-difference
/// Jacobian.
fn polish(x0: [f64; 8]) -> (PyramidQuad, f64) {
    let (mut r0, mut res, mut q) = residual_of(&x0).expect("admissible start");
    let mut x = q.flat();
    let mut damping = 1e-3;
    for _ in 0..200 {
        if r0 < 1e-15 {
            break;
        }
        let h = 1e-7;
        let mut jac = [[0.0; 8]; 3];
        for c in 0..8 {
            let mut y = x;
            y[c] += h;
            let mut z = x;
            z[c] -= h;
            if let (Some((_, ry, _)), Some((_, rz, _))) = (residual_of(&y), residual_of(&z)) {
                for k in 0..3 {
                    jac[k][c] = (ry[k] - rz[k]) / (2.0 * h);
                }
            }
        }
        let gram = |a: usize, b: usize| (0..8).map(|c| jac[a][c] * jac[b][c]).sum::<f64>();
        let mut accepted = false;
        for _ in 0..12 {
            let g = [
                Vec3::new(gram(0, 0) + damping, gram(0, 1), gram(0, 2)),
                Vec3::new(gram(1, 0), gram(1, 1) + damping, gram(1, 2)),
                Vec3::new(gram(2, 0), gram(2, 1), gram(2, 2) + damping),
            ];
            if let Some(lam) = math::solve3(g[0], g[1], g[2], res, 1e-300) {
                let y: [f64; 8] = core::array::from_fn(|c| x[c] - (0..3).map(|k| jac[k][c] * lam[k]).sum::<f64>());
                if let Some((r, ry, gq)) = residual_of(&y) {
                    if r < r0 {
                        (r0, res, q) = (r, ry, gq);
                        x = q.flat();
                        damping = (damping / 3.0).max(1e-12);
                        accepted = true;
                        break;
                    }
                }
            }
            damping *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    (q, r0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSolution {
    /// Gauged corners `[x₁, y₁, …, x₄, y₄]`.
    pub p: [f64; 8],
    pub residual: f64,
    pub max_f: f64,
    pub f: [f64; 4],
    /// Two adjacent corner angles below `π/2`.
    pub adjacent_acute: bool,
    /// Two adjacent corner angles above `π/3`.
    pub adjacent_above_third: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Sorted by residual, then by coordinates.
    pub solutions: Vec<ScanSolution>,
    /// Solutions with `max|F| > 100·tol`.
    pub counterexamples: usize,
}

pub const SCAN_ITERATIONS: usize = 100;

/// Descent stays among quadrilaterals with at least this margin; without it
/// the residual is driven to zero by collapsing the quadrilateral.
pub const SCAN_MARGIN: f64 = 1e-2;

fn random_quad(rng: &mut ChaCha8Rng) -> PyramidQuad {
    loop {
        let mut angles: [f64; 4] = core::array::from_fn(|k| (k as f64 + rng.random_range(-0.4..0.4)) * PI / 2.0);
        angles.sort_by(f64::total_cmp);
        let p = angles.map(|a| {
            let r = rng.random_range(0.2..1.0);
            [r * math::cos(a), r * math::sin(a)]
        });
        if let Ok(q) = PyramidQuad::new(p) {
            if q.margin() >= SCAN_MARGIN {
                return q;
            }
        }
    }
}

/// One scan sample; sample `index` draws from stream `index` of the seeded
/// generator, so samples can be evaluated in any order.
pub fn scan_sample(seed: u64, index: u64, tol: f64) -> Option<ScanSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let start = random_quad(&mut rng);
    let (q, residual) = descend(&start, SCAN_ITERATIONS).ok()?;
    if !(residual < tol) {
        return None;
    }
    let f = pyramid_f(&q).ok()?;
    let ang = q.angles();
    let pair = |pred: &dyn Fn(f64) -> bool| (0..4).any(|i| pred(ang[i]) && pred(ang[(i + 1) % 4]));
    Some(ScanSolution {
        p: q.flat(),
        residual,
        max_f: f.iter().fold(0.0, |m, v| m.max(v.abs())),
        f,
        adjacent_acute: pair(&|a| a < PI / 2.0),
        adjacent_above_third: pair(&|a| a > PI / 3.0),
    })
}

/// Searches random admissible quadrilaterals for solutions of the chain
/// `F₁ = −F₂ = F₃ = −F₄` and reports those with residual below `tol`.
pub fn cleancond_scan(samples: usize, seed: u64, tol: f64) -> Result<ScanReport> {
    if samples == 0 {
        return Err(Error::BadParameter("samples must be at least 1".into()));
    }
    let solutions = (0..samples as u64).filter_map(|i| scan_sample(seed, i, tol)).collect();
    Ok(merge_scan(samples, seed, tol, solutions))
}

/// Deterministic merge of per-sample results.
pub fn merge_scan(samples: usize, seed: u64, tol: f64, mut solutions: Vec<ScanSolution>) -> ScanReport {
    solutions.sort_by(|a, b| {
        a.residual.total_cmp(&b.residual).then_with(|| {
            a.p.iter()
                .zip(&b.p)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
    });
    let counterexamples = solutions.iter().filter(|s| s.max_f > 100.0 * tol).count();
    ScanReport {
        samples,
        seed,
        tol,
        solutions,
        counterexamples,
    }
}
