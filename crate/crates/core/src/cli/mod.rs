//! Command-line front end. Every command prints one JSON [`RunReport`] to
//! stdout; `--out DIR` additionally writes CSV/SVG artifacts.
//!
//! Exit codes: 0 success, 1 a certified property failed, 2 invalid input.

pub mod report;
pub mod scene;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::convex_sets::ConvexSet;
use crate::curvature_probe;
use crate::double_projection::{self, DpCase, DpOptions};
use crate::error::GeomError;
use crate::model_spaces::{self, GeodesicSegment, ModelSpace};
use crate::norms::{NormSpec, Vector};
use crate::projection::{self, Direction};

pub use report::RunReport;
pub use scene::{load_scene, parse_scene, Scene, SceneOptions};

pub const THREADS_ENV: &str = "FINSLER_PROJECT_THREADS";

const FIGURE1_REFERENCE: [[f64; 2]; 5] = [
    [0.0, 0.0],
    [0.0, 0.0],
    [0.32338512, -0.32338512],
    [0.23349577, -0.23349577],
    [-0.08988935, 0.08988935],
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scene:\n  {}", .0.join("\n  "))]
    Scene(Vec<String>),
    #[error("{0}")]
    Geom(#[from] GeomError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "finsler-project", version, about = "Metric projections on Minkowski spaces and model surfaces")]
struct Args {
    /// Directory for CSV/SVG artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirArg {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    Forward,
    Backward,
    Reversible,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project a query point onto a set of a scene.
    Project {
        #[arg(long)]
        scene: PathBuf,
        /// Defaults to every set.
        #[arg(long)]
        set: Option<String>,
        /// Defaults to every query point.
        #[arg(long)]
        query: Option<String>,
        #[arg(long, value_enum, default_value = "forward")]
        direction: DirArg,
    },
    /// Compare the fixed-point and best-approximation forms.
    DpCheck {
        #[arg(long, required_unless_present = "suite")]
        scene: Option<PathBuf>,
        #[arg(long, default_value = "S1")]
        first: String,
        #[arg(long, default_value = "S2")]
        second: String,
        #[arg(long, default_value = "q")]
        query: String,
        #[arg(long, value_enum, default_value = "forward")]
        case: CaseArg,
        /// Run this many random instances instead of a scene.
        #[arg(long, conflicts_with = "scene")]
        suite: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_resolution: Option<usize>,
    },
    /// Query point and its four compositions for the slope-walking example.
    #[command(name = "reproduce-figure1")]
    ReproduceFigure1,
    /// CAT(κ̄) comparison on random triangles, or one triangle with given sides.
    #[command(allow_negative_numbers = true)]
    CatCheck {
        #[arg(long)]
        kappa: f64,
        /// Defaults to `--kappa`.
        #[arg(long)]
        kappa_bar: Option<f64>,
        /// Side lengths `d12,d13,d23` of a single triangle in M_κ.
        #[arg(long, value_delimiter = ',')]
        sides: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        grid: usize,
    },
    /// Ptolemy residuals on random quadruples.
    #[command(allow_negative_numbers = true)]
    Ptolemy {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also evaluate four equally spaced points on a great circle (κ > 0).
        #[arg(long)]
        great_circle: bool,
    },
    /// Projection non-expansiveness trials.
    #[command(allow_negative_numbers = true)]
    Nonexpansive {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Parallelogramoid curvature estimate.
    #[command(allow_negative_numbers = true)]
    Curvature {
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        h_list: Vec<f64>,
        /// Additional random base points and frames.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Quick invariant suites of every module.
    Selftest,
}

struct Outcome {
    inputs: Value,
    files: Vec<Vec<u8>>,
    results: Value,
    violation: bool,
    artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn new(inputs: Value, results: Value, violation: bool) -> Self {
        Outcome { inputs, files: Vec::new(), results, violation, artifacts: Vec::new() }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let start = Instant::now();
    let name = command_name(&args.command);
    let outcome = match dispatch(args.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(dir) = &args.out {
        if let Err(e) = write_artifacts(dir, &outcome.artifacts) {
            eprintln!("error: {e}");
            return 2;
        }
    }
    let files: Vec<&[u8]> = outcome.files.iter().map(Vec::as_slice).collect();
    let report = RunReport {
        command: name.to_string(),
        inputs_digest: report::inputs_digest(&outcome.inputs, &files),
        results: outcome.results,
        wall_time: start.elapsed().as_secs_f64(),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    i32::from(outcome.violation)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn write_artifacts(dir: &Path, artifacts: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in artifacts {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Project { .. } => "project",
        Command::DpCheck { .. } => "dp-check",
        Command::ReproduceFigure1 => "reproduce-figure1",
        Command::CatCheck { .. } => "cat-check",
        Command::Ptolemy { .. } => "ptolemy",
        Command::Nonexpansive { .. } => "nonexpansive",
        Command::Curvature { .. } => "curvature",
        Command::Selftest => "selftest",
    }
}

fn dispatch(c: Command) -> Result<Outcome, CliError> {
    match c {
        Command::Project { scene, set, query, direction } => project_cmd(&scene, set, query, direction),
        Command::DpCheck { scene, first, second, query, case, suite, seed, grid_resolution } => {
            let case = match case {
                CaseArg::Forward => DpCase::Forward,
                CaseArg::Backward => DpCase::Backward,
                CaseArg::Reversible => DpCase::Reversible,
            };
            match (scene, suite) {
                (_, Some(n)) => dp_suite_cmd(case, n, seed.unwrap_or(0), grid_resolution.unwrap_or(101)),
                (Some(path), None) => dp_scene_cmd(&path, &first, &second, &query, case, seed, grid_resolution),
                (None, None) => Err(CliError::Usage("dp-check needs --scene or --suite".into())),
            }
        }
        Command::ReproduceFigure1 => figure1_cmd(),
        Command::CatCheck { kappa, kappa_bar, sides, trials, seed, grid } => {
            cat_cmd(kappa, kappa_bar.unwrap_or(kappa), sides, trials, seed, grid)
        }
        Command::Ptolemy { kappa, trials, seed, great_circle } => ptolemy_cmd(kappa, trials, seed, great_circle),
        Command::Nonexpansive { kappa, trials, seed } => {
            let s = curvature_probe::npc_projection_test(kappa, trials, seed)?;
            let violation = if kappa <= 0.0 { s.nonexpansive_violations + s.best_approximation_violations > 0 } else { false };
            Ok(Outcome::new(json!({"kappa": kappa, "trials": trials, "seed": seed}), json!(s), violation))
        }
        Command::Curvature { kappa, h_list, trials, seed } => curvature_cmd(kappa, &h_list, trials, seed),
        Command::Selftest => Ok(selftest()),
    }
}

fn direction(d: DirArg) -> Direction {
    match d {
        DirArg::Forward => Direction::Forward,
        DirArg::Backward => Direction::Backward,
    }
}

fn named<'a>(scene: &'a Scene, name: &str) -> Result<&'a ConvexSet, CliError> {
    scene.set(name).ok_or_else(|| CliError::Usage(format!("scene has no set named {name:?}")))
}

fn project_cmd(path: &Path, set: Option<String>, query: Option<String>, dir: DirArg) -> Result<Outcome, CliError> {
    let (scene, bytes) = load_scene(path)?;
    let sets: Vec<&(String, ConvexSet)> = scene.sets.iter().filter(|(n, _)| set.as_ref().is_none_or(|s| s == n)).collect();
    let queries: Vec<&(String, Vector)> = scene.query_points.iter().filter(|(n, _)| query.as_ref().is_none_or(|q| q == n)).collect();
    if sets.is_empty() || queries.is_empty() {
        return Err(CliError::Usage("no matching set or query point in the scene".into()));
    }
    let dir = direction(dir);
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for (sname, s) in &sets {
        for (qname, q) in &queries {
            let r = projection::project(&scene.norm, s, q, dir)?;
            let mut row = vec![r.distance, r.variational_residual];
            row.extend(r.minimizer.iter());
            rows.push((format!("{sname}/{qname}"), row));
            results.push(json!({"set": sname, "query": qname, "direction": dir, "result": r}));
        }
    }
    let n = scene.norm.dim();
    let mut header = vec!["pair".to_string(), "distance".into(), "variationalResidual".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut o = Outcome::new(
        json!({"set": set, "query": query, "direction": dir}),
        Value::Array(results),
        false,
    );
    o.files.push(bytes);
    o.artifacts.push(("project.csv".into(), report::labelled_csv(&header, &rows)));
    Ok(o)
}

fn dp_scene_cmd(
    path: &Path,
    first: &str,
    second: &str,
    query: &str,
    case: DpCase,
    seed: Option<u64>,
    grid: Option<usize>,
) -> Result<Outcome, CliError> {
    let (scene, bytes) = load_scene(path)?;
    let s1 = named(&scene, first)?;
    let s2 = named(&scene, second)?;
    let q = scene.query(query).ok_or_else(|| CliError::Usage(format!("scene has no query point named {query:?}")))?;
    let opts = DpOptions {
        grid_resolution: grid.unwrap_or(scene.options.grid_resolution),
        clip_radius: scene.options.clip_radius,
        tol_fp: scene.options.tol_fp,
    };
    let r = double_projection::dp_report_with(&scene.norm, s1, s2, q, case, &opts)?;
    let mut o = Outcome::new(
        json!({"first": first, "second": second, "query": query, "case": case,
               "seed": seed.unwrap_or(scene.options.seed), "gridResolution": opts.grid_resolution}),
        json!(r),
        !r.equivalence_verdict,
    );
    o.files.push(bytes);
    Ok(o)
}

/// Norms of the random equivalence suites.
pub fn suite_specs(case: DpCase) -> Vec<NormSpec> {
    if case == DpCase::Reversible {
        return vec![NormSpec::euclidean(3).unwrap(), NormSpec::pnorm(3, 4.0).unwrap()];
    }
    let a = nalgebra::DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]);
    vec![
        NormSpec::pnorm(3, 4.0).unwrap(),
        NormSpec::randers(a, Vector::from_vec(vec![0.3, -0.2, 0.1])).unwrap(),
        NormSpec::matsumoto_reference(),
    ]
}

fn dp_suite_cmd(case: DpCase, count: usize, seed: u64, grid: usize) -> Result<Outcome, CliError> {
    let s = double_projection::equivalence_suite(&suite_specs(case), case, count, seed, grid)?;
    let violation = s.agreements != s.instances;
    Ok(Outcome::new(
        json!({"suite": count, "case": case, "seed": seed, "gridResolution": grid}),
        json!(s),
        violation,
    ))
}

fn figure1_cmd() -> Result<Outcome, CliError> {
    let pts = double_projection::matsumoto_reproduction()?;
    let deviation = pts
        .iter()
        .zip(FIGURE1_REFERENCE)
        .map(|(p, r)| (p.point[0] - r[0]).abs().max((p.point[1] - r[1]).abs()))
        .fold(0.0f64, f64::max);
    let rows: Vec<(String, Vec<f64>)> = pts.iter().map(|p| (p.label.clone(), vec![p.point[0], p.point[1]])).collect();
    let (s1, s2) = ConvexSet::paper_example_sets();
    let mut o = Outcome::new(
        json!({"norm": "matsumoto", "v": 10.0, "alpha": std::f64::consts::FRAC_PI_3, "gravity": 9.81}),
        json!({"points": pts, "maxDeviation": deviation}),
        deviation > 1e-6,
    );
    o.artifacts.push(("figure1.csv".into(), report::labelled_csv(&["mode", "x", "y"], &rows)));
    o.artifacts.push(("figure1.svg".into(), svg::overlay(&[("S1", &s1), ("S2", &s2)], &pts)));
    Ok(o)
}

/// Radius of the sampling disc used by the random model-space checks.
fn spread(kappa: f64) -> f64 {
    if kappa > 0.0 {
        0.25 * model_spaces::diameter(kappa)
    } else {
        2.0
    }
}

fn cat_cmd(kappa: f64, kappa_bar: f64, sides: Option<Vec<f64>>, trials: usize, seed: u64, grid: usize) -> Result<Outcome, CliError> {
    let inputs = json!({"kappa": kappa, "kappaBar": kappa_bar, "sides": sides, "trials": trials, "seed": seed, "grid": grid});
    let space = ModelSpace::new(kappa)?;
    if let Some(s) = sides {
        if s.len() != 3 {
            return Err(CliError::Usage(format!("--sides needs three lengths, got {}", s.len())));
        }
        let tri = model_spaces::comparison_triangle(s[0], s[1], s[2], kappa)?;
        let r = model_spaces::cat_check(&tri, kappa_bar, grid)?;
        let violation = r.max_cat_violation > 1e-9;
        return Ok(Outcome::new(inputs, json!(r), violation));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_report = None;
    for _ in 0..trials {
        let tri = [0, 1, 2].map(|_| space.random_point(&mut rng, spread(kappa)));
        let r = model_spaces::cat_check(&tri, kappa_bar, grid)?;
        if r.max_cat_violation > worst {
            worst = r.max_cat_violation;
            worst_report = Some(r);
        }
    }
    Ok(Outcome::new(
        inputs,
        json!({"trials": trials, "maxCatViolation": worst, "worst": worst_report}),
        worst > 1e-9,
    ))
}

fn ptolemy_cmd(kappa: f64, trials: usize, seed: u64, great_circle: bool) -> Result<Outcome, CliError> {
    let space = ModelSpace::new(kappa)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..trials {
        let p = [0, 1, 2, 3].map(|_| space.random_point(&mut rng, spread(kappa)));
        min = min.min(model_spaces::ptolemy_residual(&p[0], &p[1], &p[2], &p[3])?);
    }
    let gc = if great_circle {
        if kappa <= 0.0 {
            return Err(CliError::Usage("--great-circle needs kappa > 0".into()));
        }
        let q = [0.0, 1.0, 2.0, 3.0].map(|i| space.lat_lon(0.0, i * std::f64::consts::FRAC_PI_2));
        let [a, b, c, d] = [q[0].clone()?, q[1].clone()?, q[2].clone()?, q[3].clone()?];
        Some(model_spaces::ptolemy_residual(&a, &b, &c, &d)?)
    } else {
        None
    };
    let violation = min < -1e-9 || gc.is_some_and(|r| r < -1e-9);
    Ok(Outcome::new(
        json!({"kappa": kappa, "trials": trials, "seed": seed, "greatCircle": great_circle}),
        json!({"trials": trials, "minResidual": if trials > 0 { json!(min) } else { Value::Null }, "greatCircleResidual": gc}),
        violation,
    ))
}

fn curvature_cmd(kappa: f64, h_list: &[f64], trials: usize, seed: u64) -> Result<Outcome, CliError> {
    let (p, v, w) = curvature_probe::unit_frame(kappa)?;
    let base = curvature_probe::curvature_estimate(kappa, &p, &v, &w, h_list)?;
    let extra = curvature_probe::random_frame_estimates(kappa, h_list, trials, seed)?;
    let violations = base.inequality_violations + extra.iter().map(|r| r.inequality_violations).sum::<usize>();
    let max_err = extra.iter().map(|r| (r.extrapolated - kappa).abs()).fold(0.0f64, f64::max);
    let rows: Vec<Vec<f64>> = base.h_values.iter().zip(&base.estimates).map(|(h, e)| vec![*h, *e]).collect();
    let mut o = Outcome::new(
        json!({"kappa": kappa, "hList": h_list, "trials": trials, "seed": seed}),
        json!({"report": base, "randomFrames": {"trials": trials, "inequalityViolations": violations - base.inequality_violations, "maxExtrapolationError": max_err}}),
        violations > 0,
    );
    o.artifacts.push(("curvature.csv".into(), report::csv(&["h", "estimate"], &rows)));
    Ok(o)
}

fn check(name: &str, f: impl FnOnce() -> Result<(bool, Value), GeomError>) -> Value {
    match f() {
        Ok((passed, detail)) => json!({"name": name, "passed": passed, "detail": detail}),
        Err(e) => json!({"name": name, "passed": false, "detail": e.to_string()}),
    }
}

fn selftest() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let checks = vec![
        check("norms: tensor identity and one-sided fundamental inequality", || {
            let mut worst_res = f64::INFINITY;
            let mut worst_defect = 0.0f64;
            for spec in suite_specs(DpCase::Forward).iter().chain(&suite_specs(DpCase::Reversible)) {
                let n = spec.dim();
                for _ in 0..200 {
                    let y = crate::norms::random_vector(&mut rng, n);
                    let w = crate::norms::random_vector(&mut rng, n);
                    let r = spec.fundamental_inequality_residual(&y, &w)?;
                    let scale = 1.0 + spec.eval(&y)? * spec.eval(&w)?;
                    worst_res = worst_res.min(r.one_sided_residual / scale);
                    worst_defect = worst_defect.max(r.tensor_defect);
                }
            }
            Ok((worst_res >= -1e-8 && worst_defect <= 1e-9, json!({"minScaledResidual": worst_res, "maxTensorDefect": worst_defect})))
        }),
        check("projection: Euclidean segment against closed form", || {
            let spec = NormSpec::euclidean(3)?;
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let a = crate::norms::random_vector(&mut rng, 3);
                let b = crate::norms::random_vector(&mut rng, 3);
                let q = crate::norms::random_vector(&mut rng, 3) * 3.0;
                let set = ConvexSet::segment(a.clone(), b.clone())?;
                let d = &b - &a;
                let t = ((&q - &a).dot(&d) / d.dot(&d)).clamp(0.0, 1.0);
                let r = projection::project_forward(&spec, &set, &q)?;
                worst = worst.max((r.minimizer - (&a + d * t)).norm());
            }
            Ok((worst <= 1e-10, json!({"maxError": worst})))
        }),
        check("double projection: slope-walking reproduction", || {
            let pts = double_projection::matsumoto_reproduction()?;
            let dev = pts
                .iter()
                .zip(FIGURE1_REFERENCE)
                .map(|(p, r)| (p.point[0] - r[0]).abs().max((p.point[1] - r[1]).abs()))
                .fold(0.0f64, f64::max);
            Ok((dev <= 1e-6, json!({"maxDeviation": dev})))
        }),
        check("double projection: non-smooth counterexample", || {
            let r = double_projection::nonsmooth_counterexample(201)?;
            Ok((r.dp1_holds && !r.dp2_holds, json!(r)))
        }),
        check("double projection: equivalence on 20 random instances per case", || {
            let mut agree = 0;
            let mut total = 0;
            for case in [DpCase::Forward, DpCase::Backward, DpCase::Reversible] {
                let s = double_projection::equivalence_suite(&suite_specs(case), case, 20, 0, 101)?;
                agree += s.agreements;
                total += s.instances;
            }
            Ok((agree == total, json!({"agreements": agree, "instances": total})))
        }),
        check("model spaces: hyperbolic CAT(0) and Ptolemy samples", || {
            let h = ModelSpace::new(-1.0)?;
            let mut cat = f64::NEG_INFINITY;
            let mut pt = f64::INFINITY;
            for _ in 0..20 {
                let t = [0, 1, 2].map(|_| h.random_point(&mut rng, 2.0));
                cat = cat.max(model_spaces::cat_check(&t, 0.0, 8)?.max_cat_violation);
                let q = [0, 1, 2, 3].map(|_| h.random_point(&mut rng, 2.0));
                pt = pt.min(model_spaces::ptolemy_residual(&q[0], &q[1], &q[2], &q[3])?);
            }
            Ok((cat <= 1e-9 && pt >= -1e-9, json!({"maxCatViolation": cat, "minPtolemy": pt})))
        }),
        check("model spaces: spherical latitude pair expands", || {
            let s = ModelSpace::new(1.0)?;
            let seg = GeodesicSegment::new(s.lat_lon(0.0, 0.0)?, s.lat_lon(0.0, 1.0)?)?;
            let r = model_spaces::nonexpansiveness_residual(&seg, &s.lat_lon(0.6, 0.25)?, &s.lat_lon(0.6, 0.75)?)?;
            Ok((r < -1e-3, json!({"residual": r})))
        }),
        check("curvature probe: extrapolated curvature for kappa in {0, 1, -1}", || {
            let mut errs = Vec::new();
            for k in [0.0, 1.0, -1.0] {
                let (p, v, w) = curvature_probe::unit_frame(k)?;
                let r = curvature_probe::curvature_estimate(k, &p, &v, &w, &[0.2, 0.1, 0.05])?;
                errs.push((r.extrapolated - k).abs());
            }
            let ok = errs[0] <= 1e-9 && errs[1] <= 0.05 && errs[2] <= 0.05;
            Ok((ok, json!({"errors": errs})))
        }),
    ];
    let failed = checks.iter().filter(|c| c["passed"] != json!(true)).count();
    Outcome::new(json!({"seed": 0}), json!({"checks": checks, "failed": failed}), failed > 0)
}
