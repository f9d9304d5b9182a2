//! JSON shapes of the reports written by the command-line tool. Field order
//! is the serialization order; every real is rounded to 12 significant
//! digits.

use melzak_core::criteria::{CriteriaReport, Element, Witness};
use melzak_core::optimizer::{OptimizeResult, SequenceStep, TypeResult};
use melzak_core::perturb::{Direction, FdCheck, Perturbation};
use melzak_core::wedge::{ScanReport, ScanSolution};
use melzak_core::Polyhedron;
use serde::Serialize;

use crate::sig::round12;

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn dir_name(d: Direction) -> &'static str {
    match d {
        Direction::Out => "out",
        Direction::In => "in",
    }
}

pub fn describe(p: Perturbation) -> String {
    match p {
        Perturbation::FaceTranslate { face, dir } => format!("translate face {face} {}", dir_name(dir)),
        Perturbation::FaceHinge { face, edge, dir } => format!("hinge face {face} edge {edge} {}", dir_name(dir)),
        Perturbation::VertexTruncate { vertex } => format!("truncate vertex {vertex}"),
    }
}

fn element_name(e: Element) -> String {
    match e {
        Element::Vertex(v) => format!("vertex {v}"),
        Element::Face(f) => format!("face {f}"),
        Element::Edge(e) => format!("edge {e}"),
        Element::FacePair(a, b) => format!("faces {a} {b}"),
        Element::Whole => "polyhedron".into(),
    }
}

#[derive(Serialize)]
pub struct CriteriaJson {
    pub criteria: Vec<VerdictJson>,
    pub summary: SummaryJson,
}

#[derive(Serialize)]
pub struct VerdictJson {
    pub id: &'static str,
    pub applicable: bool,
    pub passed: bool,
    pub witnesses: Vec<WitnessJson>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct WitnessJson {
    pub element: String,
    pub measured: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
    #[serde(rename = "dM", skip_serializing_if = "Option::is_none")]
    pub dm: Option<f64>,
}

#[derive(Serialize)]
pub struct SummaryJson {
    pub is_candidate_minimizer: bool,
    pub triangle_count: usize,
    pub max_vertex_degree: usize,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        WitnessJson {
            element: element_name(w.element),
            measured: round12(w.measured),
            threshold: round12(w.threshold),
            perturbation: w.improving_perturbation.map(describe),
            dm: w.dm.map(round12),
        }
    }
}

impl From<&CriteriaReport> for CriteriaJson {
    fn from(r: &CriteriaReport) -> Self {
        CriteriaJson {
            criteria: r
                .verdicts
                .iter()
                .map(|v| VerdictJson {
                    id: v.id,
                    applicable: v.applicable,
                    passed: v.passed,
                    witnesses: v.witnesses.iter().map(WitnessJson::from).collect(),
                    notes: v.notes.clone(),
                })
                .collect(),
            summary: SummaryJson {
                is_candidate_minimizer: r.summary.is_candidate_minimizer,
                triangle_count: r.summary.triangle_count,
                max_vertex_degree: r.summary.max_vertex_degree,
            },
        }
    }
}

#[derive(Serialize)]
pub struct DerivativeJson {
    pub perturbation: String,
    pub e: f64,
    pub v: f64,
    pub m: f64,
    #[serde(rename = "dE")]
    pub de: f64,
    #[serde(rename = "dV")]
    pub dv: f64,
    #[serde(rename = "dM")]
    pub dm: f64,
    /// `[vertex, rate]` pairs.
    #[serde(rename = "per_vertex_dE")]
    pub per_vertex_de: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd: Option<FdJson>,
}

#[derive(Serialize)]
pub struct FdJson {
    pub passed: bool,
    pub samples: Vec<FdSampleJson>,
    /// Observed convergence orders for E, V and M; null at rounding level.
    pub order: [Option<f64>; 3],
}

#[derive(Serialize)]
pub struct FdSampleJson {
    pub h: f64,
    #[serde(rename = "dE")]
    pub de: f64,
    #[serde(rename = "dV")]
    pub dv: f64,
    #[serde(rename = "dM")]
    pub dm: f64,
}

impl DerivativeJson {
    pub fn new(r: &melzak_core::perturb::DerivativeReport, fd: Option<&FdCheck>) -> Self {
        DerivativeJson {
            perturbation: describe(r.perturbation),
            e: round12(r.e0),
            v: round12(r.v0),
            m: round12(r.m0),
            de: round12(r.de),
            dv: round12(r.dv),
            dm: round12(r.dm),
            per_vertex_de: r.per_vertex_de.iter().map(|&(v, x)| (v, round12(x))).collect(),
            fd: fd.map(|c| FdJson {
                passed: c.passed,
                samples: c
                    .samples
                    .iter()
                    .map(|s| FdSampleJson {
                        h: round12(s.h),
                        de: round12(s.de),
                        dv: round12(s.dv),
                        dm: round12(s.dm),
                    })
                    .collect(),
                order: c.order.map(|o| o.map(round12)),
            }),
        }
    }
}

#[derive(Serialize)]
pub struct ScanJson {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub counterexamples: usize,
    pub solutions: Vec<SolutionJson>,
}

#[derive(Serialize)]
pub struct SolutionJson {
    pub p: [f64; 8],
    pub residual: f64,
    #[serde(rename = "maxF")]
    pub max_f: f64,
    #[serde(rename = "F")]
    pub f: [f64; 4],
    pub adjacent_acute: bool,
    pub adjacent_above_third: bool,
}

impl From<&ScanSolution> for SolutionJson {
    fn from(s: &ScanSolution) -> Self {
        SolutionJson {
            p: s.p.map(round12),
            residual: round12(s.residual),
            max_f: round12(s.max_f),
            f: s.f.map(round12),
            adjacent_acute: s.adjacent_acute,
            adjacent_above_third: s.adjacent_above_third,
        }
    }
}

impl From<&ScanReport> for ScanJson {
    fn from(r: &ScanReport) -> Self {
        ScanJson {
            samples: r.samples,
            seed: r.seed,
            tol: round12(r.tol),
            counterexamples: r.counterexamples,
            solutions: r.solutions.iter().map(SolutionJson::from).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct OptimizeJson {
    pub ratio: f64,
    pub e: f64,
    pub v: f64,
    pub faces: usize,
    pub vertices: usize,
    pub iterations: usize,
    pub converged: bool,
    pub combinatorics_changed: bool,
    pub gradient_norm: f64,
}

impl OptimizeJson {
    pub fn new(r: &OptimizeResult) -> Self {
        let p: &Polyhedron = &r.polyhedron;
        OptimizeJson {
            ratio: round12(r.ratio),
            e: round12(p.edge_length()),
            v: round12(p.volume().unwrap_or(f64::NAN)),
            faces: p.num_faces(),
            vertices: p.num_vertices(),
            iterations: r.iterations,
            converged: r.converged,
            combinatorics_changed: r.combinatorics_changed,
            gradient_norm: round12(r.gradient_norm),
        }
    }
}

#[derive(Serialize)]
pub struct SequenceJson {
    pub max_faces: usize,
    pub seed: u64,
    pub steps: Vec<StepJson>,
}

#[derive(Serialize)]
pub struct StepJson {
    pub faces: usize,
    pub element: String,
    pub element_faces: usize,
    pub ratio: f64,
    pub tie: bool,
    pub types: Vec<TypeJson>,
}

#[derive(Serialize)]
pub struct TypeJson {
    pub name: String,
    pub simple: bool,
    pub ratio: f64,
    pub converged: bool,
    pub combinatorics_changed: bool,
}

impl From<&TypeResult> for TypeJson {
    fn from(t: &TypeResult) -> Self {
        TypeJson {
            name: t.name.clone(),
            simple: t.simple,
            ratio: round12(t.best.ratio),
            converged: t.best.converged,
            combinatorics_changed: t.best.combinatorics_changed,
        }
    }
}

impl SequenceJson {
    pub fn new(max_faces: usize, seed: u64, steps: &[SequenceStep]) -> Self {
        SequenceJson {
            max_faces,
            seed,
            steps: steps
                .iter()
                .map(|s| StepJson {
                    faces: s.faces,
                    element: s.element.name.clone(),
                    element_faces: s.element.faces,
                    ratio: round12(s.element.best.ratio),
                    tie: s.tie,
                    types: s.types.iter().map(TypeJson::from).collect(),
                })
                .collect(),
        }
    }
}

/// `iter,ratio` rows.
pub fn trace_csv(trace: &[(usize, f64)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iter", "ratio"]).expect("in-memory write");
    for &(i, m) in trace {
        w.write_record([i.to_string(), crate::sig::sig12(m)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
