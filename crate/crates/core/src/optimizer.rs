//! Local minimization of the ratio over halfspace parameters with the
//! combinatorial type held fixed, and the small-face-count sequence built
//! from it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{self, CatalogEntry};
use crate::error::{Error, Result};
use crate::math::{self, Vec3};
use crate::perturb::{self, Perturbation};
use crate::poly::{HalfSpace, Polyhedron};
use crate::sample;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeOptions {
    pub max_iters: usize,
    /// Stop when `‖∇m‖` falls below this or below the finite-difference
    /// noise level, whichever is larger.
    pub grad_tol: f64,
    /// Length of the first step in parameter space.
    pub step_init: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iters: 500,
            grad_tol: 1e-9,
            step_init: 0.05,
            fd_step: 1e-6,
            restarts: 3,
            seed: 0,
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.grad_tol > 0.0
            && self.step_init > 0.0
            && self.fd_step > 0.0
            && self.restarts > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadParameter(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    /// Final polyhedron, scaled to unit volume.
    pub polyhedron: Polyhedron,
    pub ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The descent stalled against a change of combinatorial type.
    pub combinatorics_changed: bool,
    pub gradient_norm: f64,
    /// `(iteration, ratio)` after every accepted step, starting at 0.
    pub trace: Vec<(usize, f64)>,
}

/// Halfspace parameterization. Face `i` has normal
/// `normalize(n₀ + a·t₁ + b·t₂)` in a tangent frame fixed at the start.
/// Faces through a vertex of degree above 3 take their offset from a shared
/// apex point so that the vertex cannot split.
struct Model {
    frames: Vec<[Vec3; 3]>,
    /// For each face, the index of its offset parameter or of its apex.
    support: Vec<Support>,
    n_params: usize,
    length_params: Vec<bool>,
}

#[derive(Clone, Copy)]
enum Support {
    Offset(usize),
    Apex(usize),
}

impl Model {
    fn new(p: &Polyhedron) -> (Model, Vec<f64>) {
        let f = p.num_faces();
        let high: Vec<usize> = (0..p.num_vertices()).filter(|&v| p.degree(v) > 3).collect();
        let mut face_apex: Vec<Option<usize>> = alloc::vec![None; f];
        let mut pinned = !high.is_empty();
        for (k, &v) in high.iter().enumerate() {
            for face in p.vertex_faces(v) {
                if face_apex[face].is_some() {
                    pinned = false;
                }
                face_apex[face] = Some(k);
            }
        }
        if !pinned {
            face_apex = alloc::vec![None; f];
        }
        let n_apex = if pinned { high.len() } else { 0 };
        let mut x = alloc::vec![0.0; 2 * f];
        let mut length_params = alloc::vec![false; 2 * f];
        let mut support = Vec::with_capacity(f);
        let apex_base = 2 * f + face_apex.iter().filter(|a| a.is_none()).count();
        for (face, a) in face_apex.iter().enumerate() {
            match a {
                Some(k) => support.push(Support::Apex(apex_base + 3 * k)),
                None => {
                    support.push(Support::Offset(x.len()));
                    x.push(p.halfspaces()[face].offset);
                    length_params.push(true);
                }
            }
        }
        for &v in high.iter().take(n_apex) {
            let c = p.vertices()[v];
            x.extend_from_slice(&c.0);
            length_params.extend_from_slice(&[true; 3]);
        }
        let frames = p
            .halfspaces()
            .iter()
            .map(|h| {
                let t1 = h.normal.any_orthogonal();
                [h.normal, t1, h.normal.cross(t1)]
            })
            .collect();
        let n_params = x.len();
        (
            Model {
                frames,
                support,
                n_params,
                length_params,
            },
            x,
        )
    }

    fn halfspaces(&self, x: &[f64]) -> Vec<HalfSpace> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, [n0, t1, t2])| {
                let n = (*n0 + *t1 * x[2 * i] + *t2 * x[2 * i + 1]).normalized();
                let d = match self.support[i] {
                    Support::Offset(j) => x[j],
                    Support::Apex(j) => n.dot(Vec3::new(x[j], x[j + 1], x[j + 2])),
                };
                HalfSpace::new(n, d)
            })
            .collect()
    }
}

struct Eval {
    poly: Polyhedron,
    ratio: f64,
    same_type: bool,
    complete: bool,
}

fn evaluate(model: &Model, x: &[f64], signature: &[Vec<usize>]) -> Option<Eval> {
    evaluate_any(model, x, signature).filter(|e| e.complete)
}

/// Also accepts builds in which some halfspace became redundant; the ratio
/// is continuous there, which is all the gradient needs.
fn evaluate_any(model: &Model, x: &[f64], signature: &[Vec<usize>]) -> Option<Eval> {
    let b = Polyhedron::from_halfspaces_report(&model.halfspaces(x)).ok()?;
    let complete = b.dropped.is_empty();
    let ratio = b.polyhedron.melzak_ratio().ok()?;
    if !ratio.is_finite() {
        return None;
    }
    let same_type = complete && b.polyhedron.combinatorial_signature() == signature;
    Some(Eval {
        poly: b.polyhedron,
        ratio,
        same_type,
        complete,
    })
}

fn gradient(model: &Model, x: &[f64], signature: &[Vec<usize>], steps: &[f64]) -> Result<Vec<f64>> {
    let mut g = alloc::vec![0.0; x.len()];
    let mut y = x.to_vec();
    for j in 0..x.len() {
        let h = steps[j];
        y[j] = x[j] + h;
        let plus = evaluate_any(model, &y, signature)
            .ok_or(Error::NumericalBreakdown)?
            .ratio;
        y[j] = x[j] - h;
        let minus = evaluate_any(model, &y, signature)
            .ok_or(Error::NumericalBreakdown)?
            .ratio;
        y[j] = x[j];
        g[j] = (plus - minus) / (2.0 * h);
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Unit-volume copy centred at the vertex centroid, rebuilt from its
/// halfspaces.
fn gauge(p: &Polyhedron) -> Result<Polyhedron> {
    let q = p.normalized_volume()?;
    let c = q.vertices().iter().fold(Vec3::ZERO, |s, &v| s + v) / q.num_vertices() as f64;
    let hs: Vec<HalfSpace> = q
        .halfspaces()
        .iter()
        .map(|h| HalfSpace::new(h.normal, h.offset - h.normal.dot(c)))
        .collect();
    let b = Polyhedron::from_halfspaces_report(&hs)?;
    if !b.dropped.is_empty() || b.polyhedron.num_faces() != p.num_faces() {
        return Err(Error::InvalidStart("start has redundant halfspaces".into()));
    }
    Ok(b.polyhedron)
}

struct Leg {
    poly: Polyhedron,
    ratio: f64,
    iterations: usize,
    converged: bool,
    hit_boundary: bool,
    gradient_norm: f64,
}

/// Quasi-Newton (BFGS) descent with a backtracking Armijo line search.
/// Steps that would change the combinatorial type are rejected like steps
/// that fail to decrease the ratio. When the descent stops, the
/// parameterization is re-centred at the current polyhedron and the descent
/// resumes, until a restart brings no further decrease.
pub fn local_optimize(p0: &Polyhedron, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    opts.validate()?;
    if !p0.is_convex() {
        return Err(Error::InvalidStart("start is not convex".into()));
    }
    let mut start = gauge(p0).map_err(|e| Error::InvalidStart(format!("{e}")))?;
    let signature = start.combinatorial_signature();
    let mut trace = alloc::vec![(0usize, start.melzak_ratio()?)];
    let mut total = 0;
    loop {
        let before = trace.last().map(|t| t.1).unwrap_or(f64::INFINITY);
        let leg = descend(&start, &signature, opts, opts.max_iters - total, &mut trace, total)?;
        total += leg.iterations;
        let gained = before - leg.ratio;
        let done = leg.iterations == 0 || total >= opts.max_iters || leg.hit_boundary || gained <= 1e-13 * leg.ratio;
        if done {
            let polyhedron = leg.poly.normalized_volume()?;
            let ratio = polyhedron.melzak_ratio()?;
            return Ok(OptimizeResult {
                polyhedron,
                ratio,
                iterations: total,
                converged: leg.converged,
                combinatorics_changed: leg.hit_boundary && !leg.converged,
                gradient_norm: leg.gradient_norm,
                trace,
            });
        }
        start = match gauge(&leg.poly) {
            Ok(p) if p.combinatorial_signature() == signature => p,
            _ => leg.poly,
        };
    }
}

fn descend(
    start: &Polyhedron,
    signature: &[Vec<usize>],
    opts: &OptimizeOptions,
    budget: usize,
    trace: &mut Vec<(usize, f64)>,
    offset: usize,
) -> Result<Leg> {
    let (model, mut x) = Model::new(start);
    let n = model.n_params;
    let diam = start.diameter();
    let steps: Vec<f64> = model
        .length_params
        .iter()
        .map(|&len| if len { opts.fd_step * diam } else { opts.fd_step })
        .collect();
    let mut cur =
        evaluate(&model, &x, signature).ok_or_else(|| Error::InvalidStart("start does not rebuild".into()))?;
    if !cur.same_type {
        return Err(Error::InvalidStart(
            "start does not rebuild with the same combinatorics".into(),
        ));
    }
    let mut g = gradient(&model, &x, signature, &steps)?;
    let mut hinv: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut hit_boundary = false;
    let mut gn = norm(&g);
    while iterations < budget {
        let floor = 10.0 * f64::EPSILON * cur.ratio / opts.fd_step * math::sqrt(n as f64);
        if gn < opts.grad_tol.max(floor) {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = match &hinv {
            Some(h) => (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect(),
            None => g.iter().map(|v| -v * opts.step_init / gn).collect(),
        };
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            hinv = None;
            dir = g.iter().map(|v| -v * opts.step_init / gn).collect();
            slope = dot(&g, &dir);
        }
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..50 {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            if let Some(e) = evaluate(&model, &y, signature) {
                if !e.same_type {
                    hit_boundary = true;
                } else if e.ratio < cur.ratio + 1e-4 * t * slope && e.ratio < cur.ratio {
                    accepted = Some((y, e));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((y, e)) = accepted else {
            if hinv.is_some() {
                hinv = None;
                continue;
            }
            break;
        };
        if e.same_type {
            hit_boundary = false;
        }
        iterations += 1;
        let Ok(g_new) = gradient(&model, &y, signature, &steps) else {
            cur = e;
            trace.push((offset + iterations, cur.ratio));
            hit_boundary = true;
            break;
        };
        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * norm(&s) * norm(&yv) {
            let mut h = hinv.take().unwrap_or_else(|| {
                let scale = sy / dot(&yv, &yv);
                let mut id = alloc::vec![0.0; n * n];
                for i in 0..n {
                    id[i * n + i] = scale;
                }
                id
            });
            bfgs_update(&mut h, &s, &yv, sy, n);
            hinv = Some(h);
        }
        x = y;
        cur = e;
        g = g_new;
        gn = norm(&g);
        trace.push((offset + iterations, cur.ratio));
    }
    Ok(Leg {
        poly: cur.poly,
        ratio: cur.ratio,
        iterations,
        converged,
        hit_boundary,
        gradient_norm: gn,
    })
}

/// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Lowest ratio first; ratios within `1e-12` relative count as equal and
/// are ordered by convergence, then by lexicographically smallest sorted
/// vertex coordinates.
pub fn better(a: &OptimizeResult, b: &OptimizeResult) -> bool {
    if (a.ratio - b.ratio).abs() > 1e-12 * a.ratio.abs().max(b.ratio.abs()) {
        return a.ratio < b.ratio;
    }
    if a.converged != b.converged {
        return a.converged;
    }
    sorted_coords(&a.polyhedron) < sorted_coords(&b.polyhedron)
}

fn sorted_coords(p: &Polyhedron) -> Vec<[u64; 3]> {
    let key = |x: f64| {
        let b = x.to_bits();
        if b >> 63 == 1 {
            !b
        } else {
            b | (1 << 63)
        }
    };
    let mut v: Vec<[u64; 3]> = p.vertices().iter().map(|c| c.0.map(key)).collect();
    v.sort_unstable();
    v
}

pub fn best_of(results: impl IntoIterator<Item = OptimizeResult>) -> Option<OptimizeResult> {
    let mut best: Option<OptimizeResult> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    best
}

/// Start polyhedra for one catalog type: the stored realization, then
/// jittered copies with the same labelled combinatorics. Pyramids get fresh
/// random pyramids instead, since jitter would split the apex.
pub fn restart_starts(entry: &CatalogEntry, stream: u64, restarts: usize, seed: u64) -> Result<Vec<Polyhedron>> {
    let base = entry.realize()?;
    let signature = base.combinatorial_signature();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = alloc::vec![base.clone()];
    while out.len() < restarts {
        let mut next = None;
        for _ in 0..100 {
            let cand = if entry.simple {
                sample::jitter(&mut rng, &base, 0.15)
            } else {
                sample::random_pyramid(&mut rng, entry.faces - 1)
            };
            if let Ok(c) = cand {
                if c.combinatorial_signature() == signature || (!entry.simple && c.num_faces() == entry.faces) {
                    next = Some(c);
                    break;
                }
            }
        }
        out.push(next.unwrap_or_else(|| base.clone()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeResult {
    pub name: String,
    pub faces: usize,
    pub simple: bool,
    pub best: OptimizeResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceStep {
    pub faces: usize,
    /// Best result for each type with exactly this many faces.
    pub types: Vec<TypeResult>,
    /// Best over all face counts up to `faces`; ties go to fewer faces.
    pub element: TypeResult,
    /// The best type with exactly `faces` faces matched an earlier element
    /// within `1e-9` relative.
    pub tie: bool,
}

/// Optimizes every restart of one catalog type and keeps the best.
pub fn optimize_type(entry: &CatalogEntry, stream: u64, opts: &OptimizeOptions) -> Result<TypeResult> {
    let starts = restart_starts(entry, stream, opts.restarts, opts.seed)?;
    let results = starts.iter().filter_map(|s| local_optimize(s, opts).ok());
    let best = best_of(results).ok_or(Error::NumericalBreakdown)?;
    Ok(TypeResult {
        name: entry.name.clone(),
        faces: entry.faces,
        simple: entry.simple,
        best,
    })
}

/// Optimizes `p0` and `opts.restarts − 1` jittered copies with the same
/// labelled combinatorics, keeping the best. Copies that keep changing type
/// after 100 draws are skipped.
pub fn optimize_with_restarts(p0: &Polyhedron, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    opts.validate()?;
    let signature = p0.combinatorial_signature();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = alloc::vec![p0.clone()];
    for _ in 1..opts.restarts {
        let next = (0..100)
            .filter_map(|_| sample::jitter(&mut rng, p0, 0.15).ok())
            .find(|c| c.combinatorial_signature() == signature);
        starts.extend(next);
    }
    let mut first_err = None;
    let mut results = Vec::new();
    for s in &starts {
        match local_optimize(s, opts) {
            Ok(r) => results.push(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best_of(results) {
        Some(r) => Ok(r),
        None => Err(first_err.unwrap_or(Error::NumericalBreakdown)),
    }
}

/// Catalog entries with `4..=max_faces` faces, paired with the RNG stream
/// each one uses.
pub fn sequence_jobs(max_faces: usize) -> Result<Vec<(u64, CatalogEntry)>> {
    if !(catalog::MIN_FACES..=catalog::MAX_FACES).contains(&max_faces) {
        return Err(Error::UnsupportedFaceCount(max_faces));
    }
    Ok(catalog::catalog()?
        .into_iter()
        .enumerate()
        .filter(|(_, e)| e.faces <= max_faces)
        .map(|(i, e)| (i as u64, e))
        .collect())
}

/// Builds the sequence from per-type results in job order.
pub fn assemble_sequence(max_faces: usize, results: Vec<TypeResult>) -> Result<Vec<SequenceStep>> {
    let mut steps: Vec<SequenceStep> = Vec::new();
    for k in catalog::MIN_FACES..=max_faces {
        let types: Vec<TypeResult> = results.iter().filter(|r| r.faces == k).cloned().collect();
        let mut best_k: Option<&TypeResult> = None;
        for t in &types {
            if best_k.is_none_or(|b| better(&t.best, &b.best)) {
                best_k = Some(t);
            }
        }
        let best_k = best_k.ok_or(Error::UnsupportedFaceCount(k))?.clone();
        let (element, tie) = match steps.last() {
            None => (best_k, false),
            Some(prev) => {
                let p = prev.element.best.ratio;
                let tie = (best_k.best.ratio - p).abs() <= 1e-9 * p;
                if tie || best_k.best.ratio > p {
                    (prev.element.clone(), tie)
                } else {
                    (best_k, false)
                }
            }
        };
        steps.push(SequenceStep {
            faces: k,
            types,
            element,
            tie,
        });
    }
    Ok(steps)
}

/// For each face count from 4 to `max_faces`, optimizes every catalog type
/// from `opts.restarts` starts and records the best polyhedron found with at
/// most that many faces.
pub fn minimizing_sequence(max_faces: usize, opts: &OptimizeOptions) -> Result<Vec<SequenceStep>> {
    opts.validate()?;
    let results = sequence_jobs(max_faces)?
        .iter()
        .map(|(stream, e)| optimize_type(e, *stream, opts))
        .collect::<Result<Vec<_>>>()?;
    assemble_sequence(max_faces, results)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalityReport {
    /// Every perturbation with a defined derivative and its `dM`.
    pub entries: Vec<(Perturbation, f64)>,
    /// Perturbations whose derivative is undefined at `p`.
    pub skipped: usize,
    pub min: Option<(Perturbation, f64)>,
    /// No perturbation decreases the ratio faster than `1e-8`.
    pub critical: bool,
}

pub const CRITICAL_DM: f64 = -1e-8;

/// Ratio derivatives of all face translations, hinges and truncations.
pub fn criticality_report(p: &Polyhedron) -> Result<CriticalityReport> {
    if !p.is_convex() {
        return Err(Error::NotConvex);
    }
    let mut entries = Vec::new();
    let mut skipped = 0;
    for pert in perturb::all_perturbations(p) {
        match perturb::derivatives(p, pert) {
            Ok(r) if r.dm.is_finite() => entries.push((pert, r.dm)),
            _ => skipped += 1,
        }
    }
    let min = entries.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1));
    Ok(CriticalityReport {
        critical: min.is_none_or(|m| m.1 >= CRITICAL_DM),
        entries,
        skipped,
        min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::Direction;
    use crate::poly::Shape;

    fn tetra_m() -> f64 {
        1296.0 * math::sqrt(2.0)
    }

    fn prism_m() -> f64 {
        4.0 * math::powf(3.0, 5.5)
    }

    #[test]
    fn irregular_tetrahedron_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = Polyhedron::canonical(Shape::RegularTetrahedron).unwrap();
        let start = sample::jitter(&mut rng, &t, 0.2).unwrap();
        let r = local_optimize(&start, &OptimizeOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.ratio - tetra_m()).abs() < 1e-6 * tetra_m(), "{}", r.ratio);
        assert!(r.trace.windows(2).all(|w| w[1].1 < w[0].1));
        assert!((r.ratio - r.polyhedron.melzak_ratio().unwrap()).abs() <= 1e-12 * r.ratio);
    }

    #[test]
    fn box_converges_to_cube() {
        let b = Polyhedron::canonical(Shape::Box {
            a: 0.8,
            b: 1.0,
            c: 1.25,
        })
        .unwrap();
        let r = local_optimize(&b, &OptimizeOptions::default()).unwrap();
        assert!((r.ratio - 1728.0).abs() < 1e-6 * 1728.0, "{}", r.ratio);
    }

    #[test]
    fn skewed_prism_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Polyhedron::canonical(Shape::OptimalPrism).unwrap();
        let start = loop {
            let s = sample::jitter(&mut rng, &p, 0.2).unwrap();
            if s.combinatorial_signature() == p.combinatorial_signature() {
                break s;
            }
        };
        let r = local_optimize(&start, &OptimizeOptions::default()).unwrap();
        assert!((r.ratio - prism_m()).abs() < 1e-6 * prism_m(), "{}", r.ratio);
    }

    #[test]
    fn critical_points_stay_put() {
        for s in [Shape::Cube, Shape::RegularTetrahedron, Shape::OptimalPrism] {
            let p = Polyhedron::canonical(s).unwrap();
            let m0 = p.melzak_ratio().unwrap();
            let r = local_optimize(&p, &OptimizeOptions::default()).unwrap();
            assert!((r.ratio - m0).abs() < 1e-9 * m0, "{s:?} {} {}", r.ratio, m0);
        }
    }

    #[test]
    fn scale_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = Polyhedron::canonical(Shape::RegularTetrahedron).unwrap();
        let start = sample::jitter(&mut rng, &t, 0.2).unwrap();
        let a = local_optimize(&start, &OptimizeOptions::default()).unwrap();
        let b = local_optimize(&start.scaled(7.5), &OptimizeOptions::default()).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-8 * a.ratio);
    }

    #[test]
    fn pyramid_keeps_its_apex() {
        let p = Polyhedron::canonical(Shape::NgonPyramid {
            n: 4,
            base_radius: 1.0,
            height: 0.6,
        })
        .unwrap();
        let r = local_optimize(&p, &OptimizeOptions::default()).unwrap();
        let q = &r.polyhedron;
        assert_eq!(q.num_vertices(), 5);
        assert!((0..5).any(|v| q.degree(v) == 4));
        assert!(r.ratio < p.melzak_ratio().unwrap());
        assert!(r.ratio > prism_m());
    }

    #[test]
    fn sequence_up_to_five_faces() {
        let opts = OptimizeOptions {
            restarts: 2,
            ..Default::default()
        };
        let seq = minimizing_sequence(5, &opts).unwrap();
        assert_eq!(seq.len(), 2);
        assert!((seq[0].element.best.ratio - tetra_m()).abs() < 1e-6 * tetra_m());
        assert!((seq[1].element.best.ratio - prism_m()).abs() < 1e-6 * prism_m());
        assert_eq!(seq[1].element.name, "s5.1");
        let pyr = seq[1].types.iter().find(|t| !t.simple).unwrap();
        assert!(pyr.best.ratio > prism_m());
        assert!(matches!(
            minimizing_sequence(9, &opts),
            Err(Error::UnsupportedFaceCount(9))
        ));
    }

    #[test]
    fn criticality_examples() {
        let prism = Polyhedron::canonical(Shape::OptimalPrism).unwrap();
        let r = criticality_report(&prism).unwrap();
        assert!(r.critical, "{:?}", r.min);
        let cube = Polyhedron::canonical(Shape::Cube).unwrap();
        let r = criticality_report(&cube).unwrap();
        for (pert, dm) in &r.entries {
            if matches!(pert, Perturbation::FaceTranslate { .. }) {
                assert!(dm.abs() < 1e-8);
            }
        }
        let oct = Polyhedron::canonical(Shape::Octahedron).unwrap();
        let r = criticality_report(&oct).unwrap();
        assert!(!r.critical);
        assert!(r.min.unwrap().1 < 0.0);
        assert!(r.entries.iter().any(|(p, dm)| matches!(
            p,
            Perturbation::FaceTranslate {
                dir: Direction::Out,
                ..
            } | Perturbation::FaceTranslate { dir: Direction::In, .. }
        ) && *dm < 0.0));
    }
}
