//! Command-line front end. Every subcommand writes one canonical JSON report
//! (and, where there is tabular data, a CSV file next to it).

use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::amenability::{
    blr_check_with, estimate_kappa_with, evaluate_witness, ErrorBoundEstimate, ProbeConfig, WitnessCurve,
};
use crate::cone::ConeSpec;
use crate::error::ConeError;
use crate::face::{conjugate_face, is_exposed, minimal_face, Exposure, FaceDescriptor, FaceHandle};
use crate::gallery::{self, GalleryName};
use crate::hull_constants::{hull_constants, HullConstants, DEFAULT_DIRECTIONS};
use crate::linalg::{from_slice, to_vec, BoundedRegion, Tolerance, Vector};
use crate::proj_exposed::{
    build_rank_one_projection, build_rank_two_projection, default_shrink_schedule, sung_tam_probe,
};
use crate::projection::{self, ProjectionMethod};
use crate::report::{write_output, CsvTable, RunMeta};
use crate::verify::{self, CheckReport};

#[derive(Parser, Debug)]
#[command(name = "conelab", version, about = "Faces, projections and error bounds of closed convex cones")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// RNG seed, recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Sample count for sampling-based commands.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long = "tol-abs", global = true, default_value_t = 1e-10)]
    pub tol_abs: f64,
    #[arg(long = "tol-rel", global = true, default_value_t = 1e-8)]
    pub tol_rel: f64,
    /// Report path. CSV output goes to the same path with a `.csv` extension.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Nearest point of the cone.
    Project {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Definition-route error bound on aff F ∩ region.
    ProbeAmenability(ProbeArgs),
    /// Bounded-linear-regularity error bound on the region.
    ProbeBlr(ProbeArgs),
    /// Face calculus.
    Face {
        #[command(subcommand)]
        op: FaceOp,
    },
    /// Slice radius, antipodality and the cone-level constant for a face of a conic hull.
    Constants {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        face: String,
        /// Error-bound constant of the slice-level face.
        #[arg(long, default_value_t = 1.0)]
        kappa_slice: f64,
        #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
        directions: usize,
    },
    /// Sung–Tam test for a codimension-one face.
    SungTam {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        face: String,
        /// Extreme rays of the dual cone to enumerate.
        #[arg(long, default_value_t = 256)]
        rays: usize,
    },
    /// Rank-one (one --point) or rank-two (two --point) projection onto a face.
    BuildProjection {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_hyphen_values = true, required = true)]
        point: Vec<String>,
    },
    /// Run a registered check, or `all`.
    Verify { name: String },
    /// CSV data for plots.
    PlotData {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub face: String,
    /// `c1,...,cd,radius`; defaults to the unit ball around the face's base point.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Extra starting points for the refinement search (repeatable).
    #[arg(long = "seed-point", allow_hyphen_values = true)]
    pub seed_point: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum FaceOp {
    /// Face containing the point in its relative interior.
    Minimal {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    Conjugate {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        face: String,
    },
    /// Exposing normal or a non-exposedness witness.
    Exposed {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        face: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Distances along the witness curve of the gallery disk face.
    Witness,
    /// det M over a grid of pairs on γ.
    DetM,
    /// Exposing heights and separation margins on the rim.
    ExposingNormals,
    /// Distances along the Sturm family x^ε.
    Sturm,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 1.
    Input(String),
    /// Iterative method did not converge: exit 2.
    NonConvergence(String),
    /// A verification ran and failed: exit 3.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 1,
            Self::NonConvergence(_) => 2,
            Self::Failed(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Input(m) => write!(f, "error: {m}"),
            Self::NonConvergence(m) => write!(f, "non-convergence: {m}"),
            Self::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

impl From<ConeError> for CliError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::NonConvergence { .. } | ConeError::Numerical(_) => Self::NonConvergence(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Applies `CONELAB_THREADS` to the global rayon pool.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("CONELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("CONELAB_THREADS must be a positive integer, got {v:?}")))?;
    // a pool that is already initialised keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Spec text from a file, or inline when it starts with `{`.
pub fn read_spec(arg: &str) -> CliResult<(ConeSpec, String)> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Input(format!("cannot read spec {arg}: {e}")))?
    };
    Ok((ConeSpec::from_json(&text)?, text))
}

pub fn parse_point(text: &str) -> CliResult<Vector> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']');
    let v = t
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Input(format!("bad coordinate {:?} in {text:?}", s.trim())))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(from_slice(&v))
}

fn parse_dim_point(text: &str, dim: usize) -> CliResult<Vector> {
    let p = parse_point(text)?;
    if p.len() != dim {
        return Err(CliError::Input(format!("point has {} coordinates, the cone lives in R^{dim}", p.len())));
    }
    Ok(p)
}

/// `c1,...,cd,radius` as a ball in R^d.
pub fn parse_region(text: &str, dim: usize) -> CliResult<BoundedRegion> {
    let v = parse_point(text)?;
    if v.len() != dim + 1 {
        return Err(CliError::Input(format!(
            "region needs {dim} center coordinates and a radius, got {} numbers",
            v.len()
        )));
    }
    Ok(BoundedRegion::ball(v.rows(0, dim).into_owned(), v[dim])?)
}

struct Ctx<'a> {
    common: &'a Common,
    command: &'static str,
    spec_text: Option<String>,
}

impl Ctx<'_> {
    fn tol(&self) -> Tolerance {
        Tolerance::new(self.common.tol_abs, self.common.tol_rel)
    }

    fn samples(&self, default: usize) -> usize {
        self.common.samples.unwrap_or(default)
    }

    fn meta(&self) -> RunMeta {
        RunMeta::new(self.command, self.spec_text.as_deref(), self.common.seed, &self.tol())
    }

    fn emit<T: Serialize>(&self, result: &T, csv: Option<&CsvTable>) -> CliResult<()> {
        let json = self.meta().wrap(result);
        let c = self.common;
        let want_json = c.format != Format::Csv;
        let csv = csv.filter(|_| c.format != Format::Json).map(CsvTable::render);
        match &c.out {
            Some(path) => {
                if want_json {
                    write_output(path, &json, c.force)?;
                }
                if let Some(text) = csv {
                    let p = if want_json { path.with_extension("csv") } else { path.clone() };
                    write_output(&p, &text, c.force)?;
                }
            }
            None => {
                let mut out = io::stdout().lock();
                if want_json {
                    out.write_all(json.as_bytes())?;
                }
                if let Some(text) = csv {
                    out.write_all(text.as_bytes())?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ProjectOut {
    input: Vec<f64>,
    point: Vec<f64>,
    polar_part: Vec<f64>,
    distance: f64,
    method: ProjectionMethod,
    iterations: usize,
    certificate_gap: f64,
}

#[derive(Serialize)]
struct FaceOut {
    descriptor: FaceDescriptor,
    dim: usize,
    ambient_dim: usize,
    basepoint: Vec<f64>,
    span: Vec<Vec<f64>>,
}

impl FaceOut {
    fn new(f: &FaceHandle) -> Self {
        Self {
            descriptor: f.descriptor.clone(),
            dim: f.dim(),
            ambient_dim: f.ambient_dim(),
            basepoint: to_vec(f.affine_hull.basepoint()),
            span: f.affine_hull.basis().iter().map(to_vec).collect(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum ExposureOut {
    Exposed { normal: Vec<f64>, level: f64, margin: f64 },
    NotExposed { witness: Vec<f64>, double_conjugate: FaceDescriptor },
    Undecided { margin: f64 },
}

impl From<Exposure> for ExposureOut {
    fn from(e: Exposure) -> Self {
        match e {
            Exposure::Exposed { normal, level, margin } => Self::Exposed {
                normal: to_vec(&normal),
                level,
                margin,
            },
            Exposure::NotExposed { witness, double_conjugate } => Self::NotExposed {
                witness: to_vec(&witness),
                double_conjugate,
            },
            Exposure::Undecided { margin } => Self::Undecided { margin },
        }
    }
}

#[derive(Serialize)]
struct ConstantsOut {
    face: FaceDescriptor,
    constants: HullConstants,
}

#[derive(Serialize)]
struct VerifyOut {
    all_passed: bool,
    checks: Vec<CheckReport>,
}

fn probe_csv(est: &ErrorBoundEstimate) -> CsvTable {
    let mut t = CsvTable::new(&["index", "dist_face", "dist_cone", "ratio"]);
    for (i, s) in est.samples.iter().enumerate() {
        t.push(vec![i as f64, s.dist_face, s.dist_cone, s.ratio.unwrap_or(f64::NAN)]);
    }
    t
}

/// Parses the command line and runs it; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match init_threads().and_then(|()| run(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let common = &cli.common;
    let ctx = |command: &'static str, spec_text: Option<String>| Ctx {
        common,
        command,
        spec_text,
    };
    match &cli.command {
        Command::Project { spec, point } => {
            let (k, text) = read_spec(spec)?;
            let x = parse_dim_point(point, k.dim())?;
            let r = projection::project(&k, &x)?;
            let out = ProjectOut {
                input: to_vec(&x),
                polar_part: to_vec(&(&x - &r.point)),
                point: to_vec(&r.point),
                distance: r.distance,
                method: r.method,
                iterations: r.iterations,
                certificate_gap: r.certificate_gap,
            };
            ctx("project", Some(text)).emit(&out, None)
        }
        Command::ProbeAmenability(a) => probe(ctx("probe-amenability", None), a, false),
        Command::ProbeBlr(a) => probe(ctx("probe-blr", None), a, true),
        Command::Face { op } => match op {
            FaceOp::Minimal { spec, point } => {
                let (k, text) = read_spec(spec)?;
                let c = ctx("face minimal", Some(text));
                let x = parse_dim_point(point, k.dim())?;
                let f = minimal_face(&k, &x, &c.tol())?;
                c.emit(&FaceOut::new(&f), None)
            }
            FaceOp::Conjugate { spec, face } => {
                let (k, text) = read_spec(spec)?;
                let f = FaceHandle::from_descriptor(&k, face)?;
                let g = conjugate_face(&k, &f)?;
                ctx("face conjugate", Some(text)).emit(&FaceOut::new(&g), None)
            }
            FaceOp::Exposed { spec, face } => {
                let (k, text) = read_spec(spec)?;
                let c = ctx("face exposed", Some(text));
                let f = FaceHandle::from_descriptor(&k, face)?;
                let e = is_exposed(&k, &f, c.samples(2000), common.seed)?;
                c.emit(&ExposureOut::from(e), None)
            }
        },
        Command::Constants {
            spec,
            face,
            kappa_slice,
            directions,
        } => {
            let (k, text) = read_spec(spec)?;
            let f = FaceHandle::from_descriptor(&k, face)?;
            let h = hull_constants(&k, &f, *kappa_slice, *directions)?;
            eprint!("{}", h.text_block());
            let out = ConstantsOut {
                face: f.descriptor.clone(),
                constants: h,
            };
            ctx("constants", Some(text)).emit(&out, None)
        }
        Command::SungTam { spec, face, rays } => {
            let (k, text) = read_spec(spec)?;
            let f = FaceHandle::from_descriptor(&k, face)?;
            let rep = sung_tam_probe(&k, &f, *rays, &default_shrink_schedule())?;
            let mut t = CsvTable::new(&["k", "radius", "hits", "nearest"]);
            for l in &rep.levels {
                t.push(vec![l.k as f64, l.radius, l.hits as f64, l.nearest.unwrap_or(f64::NAN)]);
            }
            ctx("sung-tam", Some(text)).emit(&rep, Some(&t))
        }
        Command::BuildProjection { spec, point } => {
            let (k, text) = read_spec(spec)?;
            let c = ctx("build-projection", Some(text));
            let n = c.samples(10_000);
            let pts = point
                .iter()
                .map(|p| parse_dim_point(p, k.dim()))
                .collect::<CliResult<Vec<_>>>()?;
            let map = match pts.as_slice() {
                [x] => build_rank_one_projection(&k, x, n, common.seed)?,
                [x, y] => build_rank_two_projection(&k, x, y, n, common.seed)?,
                _ => return Err(CliError::Input("give one or two --point values".into())),
            };
            let summary = map.summary();
            c.emit(&summary, None)?;
            if summary.certified {
                Ok(())
            } else {
                Err(CliError::Failed("projection map is not certified".into()))
            }
        }
        Command::Verify { name } => {
            let names: Vec<&str> = if name == "all" {
                verify::CHECKS.to_vec()
            } else {
                vec![name.as_str()]
            };
            let mut checks = Vec::new();
            for n in names {
                let r = verify::run_check(n, common.seed)?;
                eprintln!(
                    "{} {} ({:.2} s)",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.runtime_s
                );
                checks.push(r);
            }
            let out = VerifyOut {
                all_passed: checks.iter().all(|c| c.passed),
                checks,
            };
            ctx("verify", None).emit(&out, None)?;
            if out.all_passed {
                Ok(())
            } else {
                Err(CliError::Failed("one or more checks failed".into()))
            }
        }
        Command::PlotData { figure } => {
            let t = plot_data(*figure)?;
            match &common.out {
                Some(p) => write_output(p, &t.render(), common.force)?,
                None => io::stdout().lock().write_all(t.render().as_bytes())?,
            }
            Ok(())
        }
    }
}

fn probe(c: Ctx<'_>, a: &ProbeArgs, blr: bool) -> CliResult<()> {
    let (k, text) = read_spec(&a.spec)?;
    let c = Ctx {
        spec_text: Some(text),
        ..c
    };
    let f = FaceHandle::from_descriptor(&k, &a.face)?;
    let region = match &a.region {
        Some(r) => parse_region(r, k.dim())?,
        None => BoundedRegion::ball(f.affine_hull.basepoint().clone(), 1.0)?,
    };
    let seeds = a
        .seed_point
        .iter()
        .map(|p| parse_dim_point(p, k.dim()))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = ProbeConfig::default();
    let n = c.samples(500);
    let est = if blr {
        blr_check_with(&k, &f, &region, n, c.common.seed, &seeds, &cfg)?
    } else {
        estimate_kappa_with(&k, &f, &region, n, c.common.seed, &seeds, &cfg)?
    };
    eprintln!("verdict {:?}, kappa_hat {:.6e}, growth {:.3}", est.verdict, est.kappa_hat, est.growth);
    c.emit(&est, Some(&probe_csv(&est)))
}

pub fn plot_data(figure: Figure) -> CliResult<CsvTable> {
    Ok(match figure {
        Figure::Witness => {
            let ts: Vec<f64> = (0..8).map(|k| 0.2 * 0.125f64.powf(k as f64 / 7.0)).collect();
            let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
            let f = FaceHandle::new(c.clone(), FaceDescriptor::DiskAlpha)?;
            let rep = evaluate_witness(&c, &f, &WitnessCurve::gallery(&ts)?)?;
            let mut t = CsvTable::new(&["t", "dist_face", "dist_cone", "dist_cone_lower", "ratio", "collapse"]);
            for r in &rep.rows {
                t.push(vec![r.t, r.dist_face, r.dist_cone, r.dist_cone_lower, r.ratio, r.collapse]);
            }
            t
        }
        Figure::DetM => {
            let n = 50;
            let grid: Vec<f64> = (0..n).map(|i| std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).collect();
            let mut t = CsvTable::new(&["t", "s", "numeric", "closed_form", "bracket"]);
            for (i, &a) in grid.iter().enumerate() {
                for &b in &grid[i + 1..] {
                    let d = gallery::det_m(a, b);
                    t.push(vec![a, b, d.numeric, d.closed_form, d.bracket]);
                }
            }
            t
        }
        Figure::ExposingNormals => {
            let mut t = CsvTable::new(&["t", "u", "margin"]);
            for i in 0..64 {
                let s = std::f64::consts::TAU * (i as f64 + 0.5) / 64.0;
                let u = gallery::exposing_normal_u(s)?;
                t.push(vec![s, u, gallery::exposing_margin(s, u, 10_000)]);
            }
            t
        }
        Figure::Sturm => {
            let mut t = CsvTable::new(&["eps", "dist_face", "dist_set", "dist_aff", "ratio", "y11"]);
            for k in 0..=40 {
                let p = gallery::sturm_family(2f64.powf(-(k as f64) / 2.0))?;
                let ratio = p.dist_to_f / (p.dist_to_c + p.dist_to_aff_f);
                t.push(vec![p.eps, p.dist_to_f, p.dist_to_c, p.dist_to_aff_f, ratio, p.y[0]]);
            }
            t
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_regions() {
        assert_eq!(parse_point("[1, -2.5,3]").unwrap(), from_slice(&[1.0, -2.5, 3.0]));
        assert!(parse_point("1,x").is_err());
        let r = parse_region("1,0,1,2", 3).unwrap();
        assert_eq!(r, BoundedRegion::ball(from_slice(&[1.0, 0.0, 1.0]), 2.0).unwrap());
        assert!(parse_region("1,0,1", 3).is_err());
        assert!(parse_region("0,0,0,-1", 3).is_err());
    }

    #[test]
    fn malformed_spec_reports_position() {
        let Err(CliError::Input(m)) = read_spec("{\"type\": \"psd\",\n \"n\": }") else {
            panic!("expected input error");
        };
        assert!(m.contains("line 2"), "{m}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["conelab", "verify", "nope"]), 1);
        assert_eq!(main_with_args(["conelab", "bogus"]), 1);
        let e: CliError = ConeError::NonConvergence {
            iterations: 5,
            gap: 1.0,
            best: vec![],
        }
        .into();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn plot_tables_have_rows() {
        assert_eq!(plot_data(Figure::DetM).unwrap().rows.len(), 1225);
        assert_eq!(plot_data(Figure::Sturm).unwrap().rows.len(), 41);
    }
}
