//! Necessary conditions for a polyhedron to be a local minimizer of the
//! ratio `e³/v`, with witnesses that point at the offending element and,
//! where one exists, a perturbation that decreases the ratio.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gauss::{self, ExposureClass};
use crate::math::{self, Vec3, PI, TAU};
use crate::perturb::{self, Direction, Perturbation};
use crate::poly::Polyhedron;

/// An attached perturbation is reported only if its ratio derivative is
/// below this value.
pub const IMPROVING_DM: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    Any,
    /// Also apply conditions that only hold along a minimizing sequence.
    Candidate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Vertex(usize),
    Face(usize),
    Edge(usize),
    FacePair(usize, usize),
    Whole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub element: Element,
    pub measured: f64,
    pub threshold: f64,
    pub improving_perturbation: Option<Perturbation>,
    /// Ratio derivative of the attached perturbation.
    pub dm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionVerdict {
    pub id: &'static str,
    pub applicable: bool,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl CriterionVerdict {
    fn new(id: &'static str) -> Self {
        CriterionVerdict {
            id,
            applicable: false,
            passed: true,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.witnesses.is_empty();
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub is_candidate_minimizer: bool,
    pub triangle_count: usize,
    pub max_vertex_degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriteriaReport {
    pub verdicts: Vec<CriterionVerdict>,
    pub summary: Summary,
}

impl CriteriaReport {
    pub fn verdict(&self, id: &str) -> Option<&CriterionVerdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }
}

/// The candidate with the most negative ratio derivative, if it improves.
fn best_improving(p: &Polyhedron, candidates: impl IntoIterator<Item = Perturbation>) -> Option<(Perturbation, f64)> {
    let mut best: Option<(Perturbation, f64)> = None;
    for pert in candidates {
        if let Ok(r) = perturb::derivatives(p, pert) {
            if r.dm.is_finite() && best.is_none_or(|b| r.dm < b.1) {
                best = Some((pert, r.dm));
            }
        }
    }
    best.filter(|b| b.1 < IMPROVING_DM)
}

fn side(class: ExposureClass) -> Option<i8> {
    match class {
        ExposureClass::Exposed => Some(1),
        ExposureClass::NegativelyExposed => Some(-1),
        ExposureClass::Neither => None,
    }
}

/// Faces that are exposed (or negatively exposed) except possibly at the two
/// ends of one of their edges. Returns the moves that keep the exempt
/// vertices fixed, and the vertices that move.
fn face_moves(
    p: &Polyhedron,
    f: usize,
    classes: &[ExposureClass],
    sigma: i8,
) -> Option<(Vec<Perturbation>, Vec<usize>)> {
    let cyc = &p.faces()[f];
    let n = cyc.len();
    let off: Vec<usize> = (0..n).filter(|&i| side(classes[cyc[i]]) != Some(sigma)).collect();
    let both = |mk: &dyn Fn(Direction) -> Perturbation| [mk(Direction::Out), mk(Direction::In)];
    match off.as_slice() {
        [] => Some((
            both(&|dir| Perturbation::FaceTranslate { face: f, dir }).to_vec(),
            cyc.clone(),
        )),
        [i] => {
            let mut moves = Vec::new();
            for j in [(*i + n - 1) % n, (*i + 1) % n] {
                let edge = p.find_edge(cyc[*i], cyc[j])?;
                moves.extend(both(&|dir| Perturbation::FaceHinge { face: f, edge, dir }));
            }
            let movers = cyc.iter().copied().filter(|&v| v != cyc[*i]).collect();
            Some((moves, movers))
        }
        [i, j] if (*i + 1) % n == *j || (*j + 1) % n == *i => {
            let edge = p.find_edge(cyc[*i], cyc[*j])?;
            let movers = cyc.iter().copied().filter(|&v| v != cyc[*i] && v != cyc[*j]).collect();
            Some((
                both(&|dir| Perturbation::FaceHinge { face: f, edge, dir }).to_vec(),
                movers,
            ))
        }
        _ => None,
    }
}

/// Faces that are exposed, semi-exposed or negatively so must not carry a
/// (correspondingly) exposed vertex of degree above 3: translating or
/// hinging such a face one way or the other lowers the ratio.
pub fn check_vertex_degree(p: &Polyhedron) -> CriterionVerdict {
    let mut out = CriterionVerdict::new("degree");
    let classes: Vec<ExposureClass> = (0..p.num_vertices()).map(|v| gauss::exposure(p, v)).collect();
    for f in 0..p.num_faces() {
        for sigma in [1i8, -1] {
            let Some((moves, movers)) = face_moves(p, f, &classes, sigma) else {
                continue;
            };
            out.applicable = true;
            let worst = movers
                .iter()
                .copied()
                .filter(|&v| side(classes[v]) == Some(sigma))
                .map(|v| p.degree(v))
                .max()
                .unwrap_or(0);
            if worst > 3 {
                let best = best_improving(p, moves);
                if best.is_none() {
                    out.notes
                        .push(format!("face {f}: no move with dM < {IMPROVING_DM:e} found"));
                }
                out.witnesses.push(Witness {
                    element: Element::Face(f),
                    measured: worst as f64,
                    threshold: 3.0,
                    improving_perturbation: best.map(|b| b.0),
                    dm: best.map(|b| b.1),
                });
            }
            break;
        }
    }
    out.finish()
}

/// Deficit-based form of the vertex threshold, `(2π − α)/√(1 − (1 − α/2π)²)`.
/// It is a lower bound for `2π/tan θ`, so exceeding it does not imply
/// exceeding the incircle threshold; it is reported only.
pub fn deficit_threshold(alpha: f64) -> f64 {
    let x = 1.0 - alpha / TAU;
    (TAU - alpha) / math::sqrt(1.0 - x * x)
}

/// Exposed vertices with `deg(H) > 2π / tan θ_H` can be truncated to lower
/// the ratio; negatively exposed vertices use the complement's Gauss image.
pub fn check_vertex_curvature(p: &Polyhedron) -> CriterionVerdict {
    let mut out = CriterionVerdict::new("curvature");
    let mut informational = 0usize;
    for v in 0..p.num_vertices() {
        let image = match gauss::exposure(p, v) {
            ExposureClass::Exposed => gauss::gauss_image(p, v),
            ExposureClass::NegativelyExposed => gauss::complement_gauss_image(p, v),
            ExposureClass::Neither => continue,
        };
        let Ok(inc) = image.and_then(|g| gauss::spherical_incircle(&g)) else {
            out.notes.push(format!("vertex {v}: incircle undefined"));
            continue;
        };
        out.applicable = true;
        let deg = p.degree(v) as f64;
        let threshold = TAU / math::tan(inc.radius);
        let alpha = gauss::angle_deficit(p, v).abs();
        if deg > deficit_threshold(alpha) {
            informational += 1;
        }
        if deg > threshold {
            let best = best_improving(p, [Perturbation::VertexTruncate { vertex: v }]);
            if best.is_none() {
                out.notes
                    .push(format!("vertex {v}: truncation does not lower the ratio"));
            }
            out.witnesses.push(Witness {
                element: Element::Vertex(v),
                measured: deg,
                threshold,
                improving_perturbation: best.map(|b| b.0),
                dm: best.map(|b| b.1),
            });
        }
    }
    if informational > 0 {
        out.notes.push(format!(
            "{informational} vertices exceed the deficit-based threshold (2π−α)/√(1−(1−α/2π)²); \
             that bound is below 2π/tan θ, so it is not used to flag vertices"
        ));
    }
    out.finish()
}

/// Angle between the velocity of `h` (moving along its third edge) and the
/// two triangle edges at `h`, as cosines.
fn triangle_cosines(p: &Polyhedron, f: usize, h: usize, sigma: f64) -> Option<(f64, f64)> {
    let cone = perturb::local_cone(p, f, h, sigma).ok()?;
    let v = cone.out_velocity().ok()?.normalized();
    Some((v.dot(cone.u1), v.dot(cone.u2)))
}

/// Exposed triangles with degree-3 vertices whose deficits sum to at most
/// `π/2`, and negatively exposed ones summing to at least `π`, admit an
/// improving single-vertex hinge. The per-vertex condition
/// `cos γ₁₂ + cos γ₁₃ < 1` is checked as well.
pub fn check_triangle_deficit(p: &Polyhedron) -> CriterionVerdict {
    let mut out = CriterionVerdict::new("triangle_deficit");
    let mut identity_gap: f64 = 0.0;
    for f in 0..p.num_faces() {
        let cyc = &p.faces()[f];
        if cyc.len() != 3 || cyc.iter().any(|&v| p.degree(v) != 3) {
            continue;
        }
        let classes: Vec<ExposureClass> = cyc.iter().map(|&v| gauss::exposure(p, v)).collect();
        let sigma = if classes.iter().all(|&c| c == ExposureClass::Exposed) {
            1.0
        } else if classes.iter().all(|&c| c == ExposureClass::NegativelyExposed) {
            -1.0
        } else {
            continue;
        };
        out.applicable = true;
        let hinges: Vec<Perturbation> = (0..3)
            .filter_map(|i| p.find_edge(cyc[(i + 1) % 3], cyc[(i + 2) % 3]))
            .flat_map(|edge| [Direction::Out, Direction::In].map(|dir| Perturbation::FaceHinge { face: f, edge, dir }))
            .collect();
        let deficit: f64 = cyc.iter().map(|&v| gauss::angle_deficit(p, v)).sum();
        let mut gamma_sum = 0.0;
        for (i, &h) in cyc.iter().enumerate() {
            let Some((c1, c2)) = triangle_cosines(p, f, h, sigma) else {
                continue;
            };
            gamma_sum += math::acos(c1) + math::acos(c2);
            if sigma > 0.0 && c1 + c2 >= 1.0 {
                let edge = p.find_edge(cyc[(i + 1) % 3], cyc[(i + 2) % 3]);
                let moves = edge.map(|edge| Perturbation::FaceHinge {
                    face: f,
                    edge,
                    dir: Direction::Out,
                });
                let best = best_improving(p, moves);
                out.witnesses.push(Witness {
                    element: Element::Vertex(h),
                    measured: c1 + c2,
                    threshold: 1.0,
                    improving_perturbation: best.map(|b| b.0),
                    dm: best.map(|b| b.1),
                });
            }
        }
        if sigma > 0.0 {
            // The velocity points along the outward continuation of the third
            // edge, so the γ angles add up to the deficit plus π.
            identity_gap = identity_gap.max((gamma_sum - PI - deficit).abs());
        }
        let (bad, threshold) = if sigma > 0.0 {
            (deficit <= PI / 2.0 + 1e-9, PI / 2.0)
        } else {
            (deficit.abs() >= PI - 1e-9, PI)
        };
        if bad {
            let best = best_improving(p, hinges);
            out.witnesses.push(Witness {
                element: Element::Face(f),
                measured: if sigma > 0.0 { deficit } else { deficit.abs() },
                threshold,
                improving_perturbation: best.map(|b| b.0),
                dm: best.map(|b| b.1),
            });
        }
    }
    if out.applicable {
        out.notes.push(format!(
            "identity Σγ − π = deficit sum over exposed triangles: max discrepancy {identity_gap:.3e}"
        ));
    }
    out.witnesses.sort_by_key(|w| w.element);
    out.finish()
}

/// `Σ_F (deg F − 6) ≤ −6χ`.
pub fn check_face_degree_sum(p: &Polyhedron) -> CriterionVerdict {
    let mut out = CriterionVerdict::new("face_degree_sum");
    out.applicable = true;
    let sum: i64 = p.faces().iter().map(|f| f.len() as i64 - 6).sum();
    let bound = -6 * p.euler_characteristic();
    if sum > bound {
        out.witnesses.push(Witness {
            element: Element::Whole,
            measured: sum as f64,
            threshold: bound as f64,
            improving_perturbation: None,
            dm: None,
        });
    }
    out.finish()
}

/// At most 14 triangular faces; only meaningful along a minimizing sequence.
pub fn check_triangle_count(p: &Polyhedron, mode: AuditMode) -> CriterionVerdict {
    let mut out = CriterionVerdict::new("triangle_count");
    out.applicable = mode == AuditMode::Candidate;
    let count = triangle_count(p);
    if out.applicable && count > 14 {
        out.witnesses.push(Witness {
            element: Element::Whole,
            measured: count as f64,
            threshold: 14.0,
            improving_perturbation: None,
            dm: None,
        });
    }
    out.finish()
}

pub fn triangle_count(p: &Polyhedron) -> usize {
    p.faces().iter().filter(|f| f.len() == 3).count()
}

/// Lower bound `2 atan(27 / (4B³))` on the dihedral angle between adjacent
/// faces of a unit-volume convex polyhedron with edge length at most `B`.
pub fn adjacent_dihedral_bound(b: f64) -> f64 {
    2.0 * math::atan(27.0 / (4.0 * b * b * b))
}

/// Lower bound for two limiting planes whose faces come within `d` of each
/// other along a shared face; `None` when the bound is vacuous.
pub fn near_dihedral_bound(b: f64, d: f64) -> Option<f64> {
    let rhs = 27.0 / (4.0 * b * b * b) * (0.5 - d * b * b / 4.0);
    (rhs > 0.0).then(|| 2.0 * math::atan(rhs))
}

/// Dihedral checks on the unit-volume copy of `p`. `b` defaults to its edge
/// length and `d` to `1/B²`.
pub fn check_dihedral(p: &Polyhedron, b: Option<f64>, d: Option<f64>) -> Result<CriterionVerdict> {
    if !p.is_convex() {
        return Err(Error::NotConvex);
    }
    let mut out = CriterionVerdict::new("dihedral");
    out.applicable = true;
    let q = p.normalized_volume()?;
    let b = b.unwrap_or_else(|| q.edge_length());
    if !(b > 0.0) {
        return Err(Error::BadParameter(format!("bound B = {b}")));
    }
    let d = d.unwrap_or(1.0 / (b * b));
    let adj = adjacent_dihedral_bound(b);
    out.notes
        .push(format!("B = {b:.12}, adjacent-face threshold {adj:.12} rad"));
    let quoted = 2.0 * math::atan(1.0 / (8.0 * math::powf(3.0, 2.5)));
    let prism_b = math::powf(2.0, 2.0 / 3.0) * math::powf(3.0, 11.0 / 6.0);
    out.notes.push(format!(
        "for B = 2^(2/3)·3^(11/6) the formula gives {:.6} rad while the quoted figure 2·atan(1/(8·3^2.5)) is {:.6} rad (factor 2 in the argument)",
        adjacent_dihedral_bound(prism_b),
        quoted
    ));
    for e in 0..q.num_edges() {
        let angle = gauss::dihedral_angle(&q, e)?;
        if angle < adj {
            out.witnesses.push(Witness {
                element: Element::Edge(e),
                measured: angle,
                threshold: adj,
                improving_perturbation: None,
                dm: None,
            });
        }
    }
    match near_dihedral_bound(b, d) {
        None => out.notes.push(format!("near-face bound vacuous for d = {d:.6e}")),
        Some(near) => {
            out.notes
                .push(format!("d = {d:.6e}, near-face threshold {near:.12} rad"));
            for (g, h) in near_pairs(&q, d) {
                let ng = q.halfspaces()[g].normal;
                let nh = q.halfspaces()[h].normal;
                let angle = PI - ng.angle(nh);
                if angle < near {
                    out.witnesses.push(Witness {
                        element: Element::FacePair(g, h),
                        measured: angle,
                        threshold: near,
                        improving_perturbation: None,
                        dm: None,
                    });
                }
            }
        }
    }
    Ok(out.finish())
}

/// Non-adjacent face pairs that both border some face `F` and whose edges
/// on `F` are within distance `d`.
fn near_pairs(p: &Polyhedron, d: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let adjacent = |g: usize, h: usize| {
        (0..p.num_edges()).any(|e| {
            let [a, b] = p.edge_faces(e);
            (a == g && b == h) || (a == h && b == g)
        })
    };
    for f in 0..p.num_faces() {
        let sides: Vec<(usize, Vec3, Vec3)> = p
            .face_edges(f)
            .into_iter()
            .map(|e| {
                let [a, b] = p.edge_faces(e);
                let other = if a == f { b } else { a };
                let [x, y] = p.edges()[e];
                (other, p.vertices()[x], p.vertices()[y])
            })
            .collect();
        for i in 0..sides.len() {
            for j in (i + 1)..sides.len() {
                let (g, a0, a1) = sides[i];
                let (h, b0, b1) = sides[j];
                let key = (g.min(h), g.max(h));
                if g == h || pairs.contains(&key) || adjacent(g, h) {
                    continue;
                }
                if math::segment_distance(a0, a1, b0, b1) <= d {
                    pairs.push(key);
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Runs every check. `bound` overrides the default `B`.
pub fn audit(p: &Polyhedron, mode: AuditMode, bound: Option<f64>) -> Result<CriteriaReport> {
    let validation = p.validate();
    if !validation.is_valid() {
        return Err(Error::InvalidPolyhedron(validation.messages.join("; ")));
    }
    let dihedral = if p.is_convex() {
        check_dihedral(p, bound, None)?
    } else {
        let mut v = CriterionVerdict::new("dihedral");
        v.notes.push("not convex".into());
        v
    };
    let mut verdicts = alloc::vec![
        check_vertex_curvature(p),
        check_vertex_degree(p),
        dihedral,
        check_face_degree_sum(p),
        check_triangle_count(p, mode),
        check_triangle_deficit(p),
    ];
    verdicts.sort_by_key(|v| v.id);
    let summary = Summary {
        is_candidate_minimizer: verdicts.iter().all(|v| !v.applicable || v.passed),
        triangle_count: triangle_count(p),
        max_vertex_degree: (0..p.num_vertices()).map(|v| p.degree(v)).max().unwrap_or(0),
    };
    Ok(CriteriaReport { verdicts, summary })
}
