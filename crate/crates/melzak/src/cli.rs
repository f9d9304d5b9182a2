//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use melzak_core::criteria::{self, AuditMode};
use melzak_core::optimizer::{self, OptimizeOptions};
use melzak_core::perturb::{self, Direction, Perturbation};
use melzak_core::{wedge, Polyhedron, Shape};

use crate::off::{emit_off, parse_off, OffError};
use crate::par::par_map;
use crate::report::{self, to_json, CriteriaJson, DerivativeJson, OptimizeJson, ScanJson, SequenceJson};
use crate::sig::sig12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "melzak", version, about = "Edge length versus volume of convex polyhedra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a canonical polyhedron as OFF.
    Build {
        /// cube | tetra | prism | octahedron | icosahedron | pyramid:N,R,H | box:A,B,C
        #[arg(long, value_parser = parse_shape)]
        shape: Shape,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print edge length, volume and ratio.
    Ratio { file: PathBuf },
    /// Check the local minimality criteria.
    Audit {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Any)]
        mode: Mode,
        /// Edge-length bound used by the dihedral check.
        #[arg(long, value_parser = positive)]
        bound: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// First-order derivatives of one perturbation, as JSON.
    Perturb {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Face index for translate and hinge, vertex index for truncate.
        #[arg(long)]
        target: usize,
        /// Hinge edge.
        #[arg(long)]
        edge: Option<usize>,
        #[arg(long, value_enum, default_value_t = Dir::Out)]
        dir: Dir,
        /// Add a finite-difference convergence check.
        #[arg(long)]
        fd: bool,
    },
    /// Minimize the ratio keeping the combinatorial type.
    Optimize {
        file: PathBuf,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        iters: u64,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of starts: the input plus jittered copies.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Best ratio for each face count, over the catalog of types.
    Sequence {
        #[arg(long, value_parser = clap::value_parser!(u64).range(4..=8))]
        max_faces: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search quadrilaterals for solutions of F1 = -F2 = F3 = -F4.
    QuadScan {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Any,
    Candidate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Translate,
    Hinge,
    Truncate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Dir {
    Out,
    In,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

pub fn parse_shape(s: &str) -> Result<Shape, String> {
    let args = |spec: &str, n: usize| -> Result<Vec<f64>, String> {
        let xs: Vec<f64> = spec
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number {t:?} in {s:?}"))
            })
            .collect::<Result<_, _>>()?;
        if xs.len() != n {
            return Err(format!("{s:?} needs {n} comma-separated values"));
        }
        if xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(format!("{s:?}: values must be positive"));
        }
        Ok(xs)
    };
    match s.split_once(':') {
        None => match s {
            "cube" => Ok(Shape::Cube),
            "tetra" => Ok(Shape::RegularTetrahedron),
            "prism" => Ok(Shape::OptimalPrism),
            "octahedron" => Ok(Shape::Octahedron),
            "icosahedron" => Ok(Shape::Icosahedron),
            _ => Err(format!("unknown shape {s:?}")),
        },
        Some(("pyramid", rest)) => {
            let x = args(rest, 3)?;
            if x[0].fract() != 0.0 || x[0] < 3.0 {
                return Err(format!("{s:?}: base needs an integer number of sides ≥ 3"));
            }
            Ok(Shape::NgonPyramid {
                n: x[0] as usize,
                base_radius: x[1],
                height: x[2],
            })
        }
        Some(("box", rest)) => {
            let x = args(rest, 3)?;
            Ok(Shape::Box {
                a: x[0],
                b: x[1],
                c: x[2],
            })
        }
        _ => Err(format!("unknown shape {s:?}")),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Geometry(#[from] melzak_core::Error),
    #[error("{path}: {source}")]
    Off { path: PathBuf, source: OffError },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

fn read_off(path: &Path) -> Result<Polyhedron, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_off(&text).map_err(|source| CliError::Off {
        path: path.into(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn convex(p: &Polyhedron) -> Result<(), CliError> {
    if p.is_convex() {
        Ok(())
    } else {
        Err(melzak_core::Error::NotConvex.into())
    }
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Usage(format!("stdout: {e}")))
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Build { shape, out: path } => {
            let p = Polyhedron::canonical(shape)?;
            write_file(&path, &emit_off(&p))
        }
        Command::Ratio { file } => {
            let p = read_off(&file)?;
            let (e, v, m) = (p.edge_length(), p.volume()?, p.melzak_ratio()?);
            emit(out, &format!("e {}\nv {}\nm {}\n", sig12(e), sig12(v), sig12(m)))
        }
        Command::Audit {
            file,
            mode,
            bound,
            json,
        } => {
            let p = read_off(&file)?;
            let mode = match mode {
                Mode::Any => AuditMode::Any,
                Mode::Candidate => AuditMode::Candidate,
            };
            let r = criteria::audit(&p, mode, bound)?;
            let mut text = String::new();
            for v in &r.verdicts {
                let status = match (v.applicable, v.passed) {
                    (false, _) => "n/a",
                    (true, true) => "pass",
                    (true, false) => "FAIL",
                };
                text += &format!("{:<18}{:<6}{} witnesses\n", v.id, status, v.witnesses.len());
            }
            text += &format!(
                "candidate_minimizer {}\ntriangles {}\nmax_degree {}\n",
                r.summary.is_candidate_minimizer, r.summary.triangle_count, r.summary.max_vertex_degree
            );
            if let Some(path) = json {
                write_file(&path, &to_json(&CriteriaJson::from(&r)))?;
            }
            emit(out, &text)
        }
        Command::Perturb {
            file,
            kind,
            target,
            edge,
            dir,
            fd,
        } => {
            let dir = match dir {
                Dir::Out => Direction::Out,
                Dir::In => Direction::In,
            };
            let pert = match (kind, edge) {
                (Kind::Translate, None) => Perturbation::FaceTranslate { face: target, dir },
                (Kind::Hinge, Some(edge)) => Perturbation::FaceHinge {
                    face: target,
                    edge,
                    dir,
                },
                (Kind::Truncate, None) => Perturbation::VertexTruncate { vertex: target },
                (Kind::Hinge, None) => return Err(CliError::Usage("--kind hinge needs --edge".into())),
                (_, Some(_)) => return Err(CliError::Usage("--edge only applies to --kind hinge".into())),
            };
            let p = read_off(&file)?;
            let json = if fd {
                let c = perturb::finite_difference_check(&p, pert, &perturb::default_fd_steps(&p))?;
                DerivativeJson::new(&c.report, Some(&c))
            } else {
                DerivativeJson::new(&perturb::derivatives(&p, pert)?, None)
            };
            emit(out, &to_json(&json))
        }
        Command::Optimize {
            file,
            iters,
            tol,
            seed,
            restarts,
            trace,
            out: path,
        } => {
            let opts = OptimizeOptions {
                max_iters: iters as usize,
                grad_tol: tol,
                seed,
                restarts: restarts as usize,
                ..OptimizeOptions::default()
            };
            let p = read_off(&file)?;
            convex(&p)?;
            let r = optimizer::optimize_with_restarts(&p, &opts)?;
            write_file(&path, &emit_off(&r.polyhedron))?;
            if let Some(t) = trace {
                write_file(&t, &report::trace_csv(&r.trace))?;
            }
            emit(out, &to_json(&OptimizeJson::new(&r)))
        }
        Command::Sequence {
            max_faces,
            seed,
            restarts,
            json,
        } => {
            let max_faces = max_faces as usize;
            let opts = OptimizeOptions {
                seed,
                restarts: restarts as usize,
                ..OptimizeOptions::default()
            };
            let jobs = optimizer::sequence_jobs(max_faces)?;
            let results = par_map(&jobs, |(stream, entry)| optimizer::optimize_type(entry, *stream, &opts))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            let steps = optimizer::assemble_sequence(max_faces, results)?;
            let mut text = format!("{:<3}{:<11}{:<17}{}\n", "k", "element", "ratio", "tie");
            for s in &steps {
                text += &format!(
                    "{:<3}{:<11}{:<17}{}\n",
                    s.faces,
                    s.element.name,
                    sig12(s.element.best.ratio),
                    if s.tie { "tie" } else { "" }
                );
                for t in &s.types {
                    let status = if t.best.converged {
                        "converged"
                    } else if t.best.combinatorics_changed {
                        "combinatorics_changed"
                    } else {
                        "stalled"
                    };
                    text += &format!("   {:<11}{:<17}{}\n", t.name, sig12(t.best.ratio), status);
                }
            }
            if let Some(path) = json {
                write_file(&path, &to_json(&SequenceJson::new(max_faces, seed, &steps)))?;
            }
            emit(out, &text)
        }
        Command::QuadScan {
            samples,
            seed,
            tol,
            json,
        } => {
            let idx: Vec<u64> = (0..samples).collect();
            let found: Vec<_> = par_map(&idx, |&i| wedge::scan_sample(seed, i, tol))
                .into_iter()
                .flatten()
                .collect();
            let r = wedge::merge_scan(samples as usize, seed, tol, found);
            let mut text = format!(
                "samples {}\nseed {}\ntol {}\nsolutions {}\ncounterexamples {}\n",
                r.samples,
                r.seed,
                sig12(r.tol),
                r.solutions.len(),
                r.counterexamples
            );
            for s in &r.solutions {
                text += &format!("residual {} maxF {}\n", sig12(s.residual), sig12(s.max_f));
            }
            if let Some(path) = json {
                write_file(&path, &to_json(&ScanJson::from(&r)))?;
            }
            emit(out, &text)
        }
    }
}
