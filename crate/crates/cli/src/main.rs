//! `holonomy`: JSON configs in, JSON or CSV results out.
//!
//! Exit status is 0 on success, 2 for unreadable or malformed input and 1
//! when a computation fails.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holonomic::connection::{chart_connection, CpnConnection};
use holonomic::curvature::{curvature_blocks, lie_closure_dimension, span_dimension, CurvatureBlock};
use holonomic::fock::{convergence_table, TableConfig, DEFAULT_CUTOFF};
use holonomic::frames::{CpnFamily, HamiltonianFamily};
use holonomic::holonomy::{adiabatic_block, holonomy_abelian_flux, stokes_rectangle};
use holonomic::loops::{compose, LoopKind, LoopSpec};
use holonomic::matrix::{c, ComplexMatrix};
use holonomic::synthesis::{synthesize_u2, LoopProgram};
use holonomic::{holonomy_ordered, Chart, ControlPoint, Loop};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const DEFAULT_STEPS: usize = 20_000;
const DEFAULT_CELLS: usize = 400;
const DEFAULT_CURVATURE_STEP: f64 = 1e-4;
const DEFAULT_ADIABATIC_TOL: f64 = 1e-2;

#[derive(Parser)]
#[command(name = "holonomy", version, about = "Holonomies, curvature and loop programs for iso-spectral families")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integration steps, overriding the config.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Fock cutoff, overriding the config.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Seed for commands that draw random inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Holonomy of a loop (or of loops composed in order).
    Holonomy,
    /// Curvature blocks `F_μν`, `μ < ν`, at a point.
    Curvature {
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Span and Lie-closure dimensions of the curvature blocks at a point.
    Irreducibility {
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Kick-method convergence table as CSV.
    KickTable,
    /// Loop program for a 2×2 unitary on CP².
    Synthesize {
        /// Target matrix JSON `{rows, cols, re, im}`.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Draw a Haar-random target from `--seed` instead.
        #[arg(long, conflicts_with = "target")]
        random: bool,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Slow-driving evolution against the holonomy of the degenerate block.
    AdiabaticCheck,
}

enum Failure {
    Input(String),
    Run(String),
}

impl From<holonomic::Error> for Failure {
    fn from(e: holonomic::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn config_or_default<T: Default + for<'de> Deserialize<'de>>(path: &Option<PathBuf>) -> Outcome<T> {
    path.as_deref().map_or_else(|| Ok(T::default()), read_json)
}

fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Run(e.to_string())),
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Method {
    #[default]
    Ordered,
    Stokes,
    Flux,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HolonomyConfig {
    #[serde(rename = "loop")]
    single: Option<LoopSpec>,
    #[serde(default)]
    loops: Vec<LoopSpec>,
    #[serde(default)]
    method: Method,
    steps: Option<usize>,
    /// Cells per side for the Stokes form.
    cells: Option<usize>,
}

fn holonomy(cli: &Cli) -> Outcome<String> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Input("holonomy needs --config".into()))?;
    let cfg: HolonomyConfig = read_json(path)?;
    let specs: Vec<&LoopSpec> = cfg.single.iter().chain(&cfg.loops).collect();
    let Some((first, rest)) = specs.split_first() else {
        return Err(Failure::Input("config names no loop; give `loop` or `loops`".into()));
    };
    let mut gamma: Loop = first.build()?;
    for spec in rest {
        gamma = compose(&gamma, &spec.build()?)?;
    }
    let a = chart_connection(gamma.chart());
    let result = match cfg.method {
        Method::Ordered => {
            let steps = cli.steps.or(cfg.steps).unwrap_or(DEFAULT_STEPS) * specs.len();
            holonomy_ordered(a.as_ref(), &gamma, steps)?
        }
        Method::Stokes => {
            let cells = cli.steps.or(cfg.cells).unwrap_or(DEFAULT_CELLS);
            stokes_rectangle(a.as_ref(), &gamma, cells, cells)?
        }
        Method::Flux => holonomy_abelian_flux(a.as_ref(), &gamma)?,
    };
    to_json(&result)
}

// A flattened chart rules out `deny_unknown_fields` here.
#[derive(Deserialize)]
struct PointConfig {
    #[serde(flatten)]
    chart: Chart,
    coords: Option<Vec<f64>>,
    step: Option<f64>,
}

fn parse_chart(name: &str, n: Option<usize>) -> Outcome<Chart> {
    let mut v = serde_json::json!({ "chart": name.to_uppercase() });
    if let Some(n) = n {
        v["n"] = n.into();
    }
    serde_json::from_value(v).map_err(|e| Failure::Input(format!("chart {name}: {e}")))
}

fn point_config(cli: &Cli, chart: &Option<String>, n: Option<usize>) -> Outcome<PointConfig> {
    match (&cli.config, chart) {
        (Some(path), None) => read_json(path),
        (None, Some(name)) => Ok(PointConfig { chart: parse_chart(name, n)?, coords: None, step: None }),
        (Some(_), Some(_)) => Err(Failure::Input("give either --config or --chart, not both".into())),
        (None, None) => Err(Failure::Input("give --config or --chart".into())),
    }
}

fn blocks_at(cfg: &PointConfig) -> Outcome<Vec<CurvatureBlock>> {
    let point = match &cfg.coords {
        Some(x) => ControlPoint::new(cfg.chart, x.clone())?,
        None => ControlPoint::origin(cfg.chart),
    };
    let a = chart_connection(cfg.chart);
    Ok(curvature_blocks(a.as_ref(), &point, cfg.step.unwrap_or(DEFAULT_CURVATURE_STEP))?)
}

fn curvature(cli: &Cli, chart: &Option<String>, n: Option<usize>) -> Outcome<String> {
    to_json(&blocks_at(&point_config(cli, chart, n)?)?)
}

#[derive(Serialize)]
struct Irreducibility {
    span_dim: usize,
    lie_dim: usize,
    n_squared: usize,
}

fn irreducibility(cli: &Cli, chart: &Option<String>, n: Option<usize>) -> Outcome<String> {
    let mut cfg = point_config(cli, chart, n)?;
    // The polar CP^n chart is singular at the origin; use the Cartesian one there.
    if let (Chart::Cpn { n }, None) = (cfg.chart, &cfg.coords) {
        cfg.chart = Chart::CpnCartesian { n };
    }
    let k = chart_connection(cfg.chart).block_dim();
    let blocks: Vec<ComplexMatrix> = blocks_at(&cfg)?.into_iter().map(|b| b.value).collect();
    to_json(&Irreducibility {
        span_dim: span_dimension(&blocks)?,
        lie_dim: lie_closure_dimension(&blocks)?,
        n_squared: k * k,
    })
}

/// Kick-table parameters with the published symbols as field names.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KickConfig {
    #[serde(default = "unit")]
    radius: f64,
    #[serde(rename = "T", default = "tenth")]
    duration: f64,
    #[serde(rename = "X", default = "unit")]
    kerr: f64,
    #[serde(default = "default_cutoff")]
    cutoff: usize,
    #[serde(rename = "Ns", default = "default_ns")]
    ns: Vec<usize>,
    #[serde(rename = "refN", default = "default_ref")]
    ref_n: usize,
}

fn unit() -> f64 {
    1.0
}
fn tenth() -> f64 {
    0.1
}
fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}
fn default_ns() -> Vec<usize> {
    TableConfig::default().ns
}
fn default_ref() -> usize {
    TableConfig::default().ref_n
}

impl Default for KickConfig {
    fn default() -> Self {
        let t = TableConfig::default();
        Self { radius: t.radius, duration: t.duration, kerr: t.kerr, cutoff: t.cutoff, ns: t.ns, ref_n: t.ref_n }
    }
}

fn kick_table(cli: &Cli) -> Outcome<String> {
    let k: KickConfig = config_or_default(&cli.config)?;
    let cfg = TableConfig {
        ns: k.ns,
        ref_n: k.ref_n,
        radius: k.radius,
        duration: k.duration,
        kerr: k.kerr,
        cutoff: cli.cutoff.unwrap_or(k.cutoff),
    };
    let rows = convergence_table(&cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::Run(e.to_string());
    w.write_record(["N", "dev00", "dev01", "dev10", "dev11"]).map_err(fail)?;
    for row in rows {
        let mut rec = vec![row.n.to_string()];
        rec.extend(row.deviations.iter().map(|d| d.map_or_else(String::new, |x| x.to_string())));
        w.write_record(&rec).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Run(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Run(e.to_string()))
}

/// Haar-random SU(2) from a uniform point of S³, times a uniform phase.
fn random_u2(seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r2: f64 = q.iter().map(|x| x * x).sum();
        if r2 > 1e-6 && r2 <= 1.0 {
            let r = r2.sqrt();
            break q.map(|x| x / r);
        }
    };
    let phase = c(0.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).exp();
    let (a, b) = (c(q[0], q[1]), c(q[2], q[3]));
    ComplexMatrix::from_rows(&[[a, -b.conj()], [b, a.conj()]]).scale(phase)
}

#[derive(Serialize)]
struct SynthesisReport {
    target: ComplexMatrix,
    tolerance: f64,
    predicted: ComplexMatrix,
    program: LoopProgram,
}

fn synthesize(cli: &Cli, target: &Option<PathBuf>, random: bool, tol: f64) -> Outcome<String> {
    let target = match (target, random) {
        (Some(path), _) => read_json::<ComplexMatrix>(path)?,
        (None, true) => {
            let seed = cli.seed.ok_or_else(|| Failure::Input("--random needs --seed".into()))?;
            random_u2(seed)
        }
        (None, false) => return Err(Failure::Input("give --target or --random".into())),
    };
    if !(tol > 0.0) {
        return Err(Failure::Input(format!("tolerance must be positive, got {tol}")));
    }
    let program = synthesize_u2(&target, tol)?;
    to_json(&SynthesisReport { predicted: program.predicted(), target, tolerance: tol, program })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdiabaticConfig {
    #[serde(rename = "loop")]
    gamma: LoopSpec,
    epsilon: f64,
    durations: Vec<f64>,
    /// Kicks per unit of evolution time.
    steps_per_time: f64,
    /// Steps for the reference holonomy.
    holonomy_steps: Option<usize>,
    tolerance: Option<f64>,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        Self {
            gamma: LoopSpec::new(
                Chart::Cpn { n: 1 },
                ["theta_1", "phi_1"],
                &[],
                LoopKind::Ellipse { center: [0.6, 1.0], semi_axes: [0.3, 0.8] },
            ),
            epsilon: 1.0,
            durations: vec![40.0, 80.0, 160.0, 320.0, 640.0],
            steps_per_time: 32.0,
            holonomy_steps: None,
            tolerance: None,
        }
    }
}

#[derive(Serialize)]
struct AdiabaticRow {
    duration: f64,
    steps: usize,
    error: f64,
}

#[derive(Serialize)]
struct AdiabaticReport {
    chart: Chart,
    /// Inverse of the engine holonomy: the limit of slow driving.
    predicted: ComplexMatrix,
    rows: Vec<AdiabaticRow>,
    /// Least-squares slope of `ln error` against `ln T`.
    slope: Option<f64>,
    tolerance: f64,
    /// Errors decrease with `T` and the last one is within tolerance.
    converged: bool,
}

fn log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn adiabatic_check(cli: &Cli) -> Outcome<String> {
    let cfg: AdiabaticConfig = config_or_default(&cli.config)?;
    let Chart::Cpn { n } = cfg.gamma.chart else {
        return Err(Failure::Input(format!("adiabatic-check runs on CPN charts, got {}", cfg.gamma.chart)));
    };
    if cfg.durations.iter().any(|&t| !(t > 0.0)) || !(cfg.steps_per_time > 0.0) {
        return Err(Failure::Input("durations and steps_per_time must be positive".into()));
    }
    let gamma = cfg.gamma.build()?;
    let family = CpnFamily { n, epsilon: cfg.epsilon };
    let h0 = family.h0();
    let u = |p: &[f64]| family.unitary(p);
    let steps = cli.steps.or(cfg.holonomy_steps).unwrap_or(DEFAULT_STEPS);
    let predicted = holonomy_ordered(&CpnConnection { n }, &gamma, steps)?.unitary.adjoint();
    let block: Vec<usize> = (0..n).collect();
    let mut rows = Vec::new();
    for &t in &cfg.durations {
        let kicks = ((cfg.steps_per_time * t).ceil() as usize).max(1);
        let m = adiabatic_block(&h0, &u, &block, &gamma, t, kicks)?;
        rows.push(AdiabaticRow { duration: t, steps: kicks, error: m.distance(&predicted) });
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let slope = log_slope(&cfg.durations, &errors);
    let tolerance = cfg.tolerance.unwrap_or(DEFAULT_ADIABATIC_TOL);
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let converged = decreasing && errors.last().is_some_and(|&e| e <= tolerance);
    to_json(&AdiabaticReport { chart: gamma.chart(), predicted, rows, slope, tolerance, converged })
}

fn configure_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("HOLONOMY_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("HOLONOMY_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Run(e.to_string()))
}

fn run(cli: &Cli) -> Outcome<()> {
    configure_threads()?;
    let text = match &cli.command {
        Command::Holonomy => holonomy(cli)?,
        Command::Curvature { chart, n } => curvature(cli, chart, *n)?,
        Command::Irreducibility { chart, n } => irreducibility(cli, chart, *n)?,
        Command::KickTable => kick_table(cli)?,
        Command::Synthesize { target, random, tol } => synthesize(cli, target, *random, *tol)?,
        Command::AdiabaticCheck => adiabatic_check(cli)?,
    };
    emit(&cli.out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("holonomy: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("holonomy: {msg}");
            ExitCode::FAILURE
        }
    }
}
