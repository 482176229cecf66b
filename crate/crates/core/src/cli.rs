//! Command-line front end.
//!
//! Every command is a pure function of its flags: the worker count and the
//! output paths never reach the output bytes, and each JSON document echoes
//! the remaining configuration under `config`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::experiment::{
    run_diffusion, simulate_flights, DiffusionConfig, DiffusionResult, ExperimentError, FlightConfig, FlightStats,
};
use crate::lattice::{
    enumerate_corridors, sig17, tail_constants, validate_lattice, Horizon, LatticeSpec, TailConstants,
};
use crate::sampling::Measure;
use crate::stats::{
    compare_report, fit_tail, DiffusionSummary, ExponentMode, MeasureSummary, Normalization, Observations,
    StatsError, SurvivalCurve, Tolerances,
};

pub const WORKERS_ENV: &str = "CORRIDOR_GAS_WORKERS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SAMPLING: i32 = 3;
pub const EXIT_FIT: i32 = 4;

const FLOW_WINDOW: (f64, f64) = (1e2, 1e4);
const MAP_WINDOW: (f64, f64) = (31.622776601683793, 3162.2776601683795);

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::config(format!("i/o error: {e}"))
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Sampling(_) | ExperimentError::Dynamics(_) => EXIT_SAMPLING,
            ExperimentError::Stats(s) => return s.into(),
            _ => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<&StatsError> for CliError {
    fn from(e: &StatsError) -> Self {
        let code = match e {
            StatsError::InsufficientTail { .. } | StatsError::DegenerateWindow(..) => EXIT_FIT,
            _ => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        (&e).into()
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 {
        Ok(x as u64)
    } else {
        Err(format!("not a non-negative integer: {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s}")),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {p}")))
        .collect()
}

/// Comma-separated generator coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisArg(pub Vec<f64>);

fn parse_basis(s: &str) -> Result<BasisArg, String> {
    parse_list(s).map(BasisArg)
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(format!("expected t_min,t_max, got {s}")),
    }
}

#[derive(Parser, Debug)]
#[command(name = "corridor-gas", version, about = "Periodic Lorentz gas: corridors, free-path tails and superdiffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the corridors of a lattice and the tail constants they imply.
    Corridors(CorridorsArgs),
    /// Sample free flights and write their survival curve.
    Simulate(SimulateArgs),
    /// Fit a power-law tail to a survival curve.
    Tailfit(TailfitArgs),
    /// Track displacement second moments along billiard trajectories.
    Diffusion(DiffusionArgs),
    /// Run the full theory-versus-simulation comparison.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    /// Spatial dimension (2 or 3).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Scatterer radius.
    #[arg(long, value_parser = parse_positive)]
    pub radius: f64,
    /// Lattice generators, comma separated: `a,b,c,d` means (a,b) and (c,d). Default: identity.
    #[arg(long, value_parser = parse_basis, allow_hyphen_values = true)]
    pub basis: Option<BasisArg>,
}

impl LatticeArgs {
    pub fn spec(&self) -> Result<LatticeSpec, CliError> {
        let spec = match &self.basis {
            None => LatticeSpec::cubic(self.dim, self.radius),
            Some(BasisArg(values)) => {
                let d = self.dim;
                if values.len() != d * d {
                    return Err(CliError::config(format!("--basis needs {} numbers for dimension {d}", d * d)));
                }
                LatticeSpec { dimension: d, basis: values.chunks(d).map(<[f64]>::to_vec).collect(), radius: self.radius }
            }
        };
        validate_lattice(spec).map_err(|e| CliError::config(format!("invalid lattice: {e}")))
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Master seed; every output is a function of the flags and this seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (overridden by CORRIDOR_GAS_WORKERS); never affects output.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Flight length at which a flight is censored.
    #[arg(long, default_value_t = 1e7, value_parser = parse_positive)]
    pub cap: f64,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
}

impl RunArgs {
    fn workers(&self) -> Result<usize, CliError> {
        let n = match std::env::var(WORKERS_ENV) {
            Ok(v) => v.trim().parse::<usize>().map_err(|_| CliError::config(format!("{WORKERS_ENV}={v} is not a count")))?,
            Err(_) => self.workers,
        };
        if n == 0 {
            return Err(CliError::config("worker count must be positive"));
        }
        Ok(n)
    }
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Smallest survival threshold.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub t_min: f64,
    /// Survival thresholds per decade.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub bins_per_decade: u32,
}

#[derive(Args, Debug)]
pub struct CorridorsArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Corridor CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Summary JSON destination (default: stderr).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MeasureArg {
    Flow,
    Map,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Flow => Measure::Flow,
            MeasureArg::Map => Measure::Map,
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Invariant measure of the initial conditions.
    #[arg(long, value_enum, default_value = "flow")]
    pub measure: MeasureArg,
    /// Number of flights (accepts forms like 1e6).
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    pub samples: u64,
    /// Survival CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Summary JSON destination (default: one line on stderr only).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExponentArg {
    Fixed(f64),
    Free,
}

fn parse_exponent(s: &str) -> Result<ExponentArg, String> {
    match s {
        "free" => Ok(ExponentArg::Free),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x < 0.0)
            .map(ExponentArg::Fixed)
            .ok_or_else(|| format!("expected a negative exponent or `free`, got {s}")),
    }
}

#[derive(Args, Debug)]
pub struct TailfitArgs {
    /// Survival CSV written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    /// Tail exponent: a fixed value such as -1 or -2, or `free`.
    #[arg(long, default_value = "free", value_parser = parse_exponent, allow_hyphen_values = true)]
    pub exponent: ExponentArg,
    /// Fit window t_min,t_max (default 1e2,1e4; 10^1.5,10^3.5 for exponent -2).
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    /// JSON destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
}

#[derive(Args, Debug)]
pub struct DiffusionArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Invariant measure of the starting points.
    #[arg(long, value_enum, default_value = "map")]
    pub measure: MeasureArg,
    /// Number of independent trajectories.
    #[arg(long, default_value = "1000", value_parser = parse_count)]
    pub trajectories: u64,
    /// Collisions per trajectory.
    #[arg(long, default_value = "1000", value_parser = parse_count)]
    pub collisions: u64,
    /// Moments CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Summary JSON destination (default: one line on stderr only).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Flights per measure.
    #[arg(long, default_value = "1e8", value_parser = parse_count)]
    pub samples: u64,
    /// Diffusion trajectories (0 skips the covariance checks).
    #[arg(long, default_value = "0", value_parser = parse_count)]
    pub trajectories: u64,
    /// Collisions per diffusion trajectory.
    #[arg(long, default_value = "10000", value_parser = parse_count)]
    pub collisions: u64,
    /// Flow fit window.
    #[arg(long, value_parser = parse_window, default_value = "1e2,1e4")]
    pub flow_window: (f64, f64),
    /// Map fit window.
    #[arg(long, value_parser = parse_window, default_value = "31.622776601683793,3162.2776601683795")]
    pub map_window: (f64, f64),
    /// Absolute tolerance of the flow exponent.
    #[arg(long, default_value_t = 0.1)]
    pub tol_flow_exponent: f64,
    /// Absolute tolerance of the map exponent.
    #[arg(long, default_value_t = 0.15)]
    pub tol_map_exponent: f64,
    /// Relative tolerance of the flow constant.
    #[arg(long, default_value_t = 0.10)]
    pub tol_flow_constant: f64,
    /// Relative tolerance of the map constant.
    #[arg(long, default_value_t = 0.15)]
    pub tol_map_constant: f64,
    /// Relative tolerance of the map/flow constant ratio against the mean free path.
    #[arg(long, default_value_t = 0.15)]
    pub tol_ratio: f64,
    /// Relative tolerance of the map-measure mean flight against the mean free path.
    #[arg(long, default_value_t = 0.01)]
    pub tol_mean_free_path: f64,
    /// Bound on the off-diagonal/diagonal covariance ratio.
    #[arg(long, default_value_t = 0.05)]
    pub tol_isotropy: f64,
    /// Longest flight allowed under a finite horizon.
    #[arg(long, default_value_t = 10.0)]
    pub flight_bound: f64,
    /// Multiplies every theoretical constant (a negative control when != 1).
    #[arg(long, default_value_t = 1.0)]
    pub theory_scale: f64,
    /// Report JSON destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn lattice_json(spec: &LatticeSpec) -> serde_json::Value {
    json!({ "dimension": spec.dimension, "basis": spec.basis, "radius": spec.radius })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_to(path: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
            f.write_all(bytes)?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn write_or_stderr(path: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(_) => write_to(path, bytes),
        None => Ok(io::stderr().lock().write_all(bytes)?),
    }
}

fn dump(config: &serde_json::Value) -> Result<(), CliError> {
    io::stdout().lock().write_all(to_json(config).as_bytes())?;
    Ok(())
}

fn cmd_corridors(args: &CorridorsArgs) -> Result<i32, CliError> {
    let spec = args.lattice.spec()?;
    let config = json!({ "command": "corridors", "lattice": lattice_json(&spec) });
    if args.dump_config {
        dump(&config)?;
        return Ok(EXIT_PASS);
    }
    let spectrum = enumerate_corridors(&spec).map_err(|e| CliError::config(e.to_string()))?;
    let mut csv = Vec::new();
    spectrum.write_csv(&mut csv)?;
    write_to(&args.output, &csv)?;
    let summary = json!({
        "config": config,
        "horizon": spectrum.horizon(),
        "corridors": spectrum.corridors.len(),
        "constants": tail_constants(&spectrum),
    });
    write_or_stderr(&args.json, to_json(&summary).as_bytes())?;
    Ok(EXIT_PASS)
}

fn flight_config(spec: &LatticeSpec, measure: Measure, samples: u64, run: &RunArgs, grid: &GridArgs) -> Result<FlightConfig, CliError> {
    if samples == 0 {
        return Err(CliError::config("--samples must be positive"));
    }
    if grid.t_min > run.cap {
        return Err(CliError::config("--t-min exceeds --cap"));
    }
    Ok(FlightConfig {
        lattice: spec.clone(),
        measure,
        samples,
        seed: run.seed,
        cap: run.cap,
        t_min: grid.t_min,
        bins_per_decade: grid.bins_per_decade,
    })
}

fn flight_summary(stats: &FlightStats) -> serde_json::Value {
    json!({
        "samples": stats.samples(),
        "mean_flight": stats.mean_length(),
        "censored": stats.censored,
        "censored_fraction": stats.censored_fraction(),
        "max_flight": stats.max_length,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let spec = args.lattice.spec()?;
    let cfg = flight_config(&spec, args.measure.into(), args.samples, &args.run, &args.grid)?;
    let config = json!({ "command": "simulate", "flights": cfg });
    if args.run.dump_config {
        dump(&config)?;
        return Ok(EXIT_PASS);
    }
    let stats = simulate_flights(&cfg, args.run.workers()?)?;
    let mut csv = Vec::new();
    stats.curve.write_csv(&mut csv)?;
    write_to(&args.output, &csv)?;
    eprintln!(
        "samples={} mean_flight={} censored_fraction={} max_flight={}",
        stats.samples(),
        stats.mean_length(),
        stats.censored_fraction(),
        stats.max_length
    );
    if args.json.is_some() {
        let summary = json!({ "config": config, "summary": flight_summary(&stats) });
        write_to(&args.json, to_json(&summary).as_bytes())?;
    }
    Ok(EXIT_PASS)
}

fn cmd_tailfit(args: &TailfitArgs) -> Result<i32, CliError> {
    let (mode, default_window) = match args.exponent {
        ExponentArg::Free => (ExponentMode::Free, FLOW_WINDOW),
        ExponentArg::Fixed(a) if a <= -1.5 => (ExponentMode::Fixed(a), MAP_WINDOW),
        ExponentArg::Fixed(a) => (ExponentMode::Fixed(a), FLOW_WINDOW),
    };
    let window = args.window.unwrap_or(default_window);
    let config = json!({ "command": "tailfit", "mode": mode, "window": [window.0, window.1] });
    if args.dump_config {
        dump(&config)?;
        return Ok(EXIT_PASS);
    }
    let file = File::open(&args.input).map_err(|e| CliError::config(format!("{}: {e}", args.input.display())))?;
    let curve = SurvivalCurve::read_csv(BufReader::new(file))?;
    let fit = fit_tail(&curve, mode, window)?;
    write_to(&args.output, to_json(&json!({ "config": config, "fit": fit })).as_bytes())?;
    Ok(EXIT_PASS)
}

fn moments_csv(result: &DiffusionResult) -> String {
    let d = result.dimension;
    let mut header = String::from("n,normalization");
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in i..d {
            header.push_str(&format!(",c{}{}", i + 1, j + 1));
            pairs.push((i, j));
        }
    }
    let mut out = header + "\n";
    for (k, &n) in result.checkpoints.iter().enumerate() {
        let rows = [
            ("raw", result.raw[k].clone()),
            ("diffusive", result.normalized(k, Normalization::Diffusive)),
            ("superdiffusive", result.normalized(k, Normalization::Superdiffusive)),
        ];
        for (name, c) in rows {
            out.push_str(&format!("{n},{name}"));
            for &(i, j) in &pairs {
                out.push(',');
                out.push_str(&sig17(c[i][j]));
            }
            out.push('\n');
        }
    }
    out
}

/// Largest `|c_ij| / sqrt(c_ii c_jj)` over `i != j`.
pub fn off_diagonal_ratio(c: &[Vec<f64>]) -> f64 {
    let mut r = 0.0f64;
    for i in 0..c.len() {
        for j in 0..c.len() {
            if i != j {
                r = r.max(c[i][j].abs() / (c[i][i] * c[j][j]).sqrt());
            }
        }
    }
    r
}

/// Slope window for the variance growth: the last decade of checkpoints.
pub fn slope_start(collisions: u64) -> u64 {
    (collisions / 10).max(2)
}

fn cmd_diffusion(args: &DiffusionArgs) -> Result<i32, CliError> {
    let spec = args.lattice.spec()?;
    let cfg = DiffusionConfig {
        lattice: spec,
        measure: args.measure.into(),
        trajectories: args.trajectories,
        collisions: args.collisions,
        seed: args.run.seed,
        cap: args.run.cap,
    };
    let config = json!({ "command": "diffusion", "diffusion": cfg });
    if args.run.dump_config {
        dump(&config)?;
        return Ok(EXIT_PASS);
    }
    let result = run_diffusion(&cfg, args.run.workers()?)?;
    write_to(&args.output, moments_csv(&result).as_bytes())?;
    let last = result.checkpoints.len() - 1;
    let ratio = off_diagonal_ratio(&result.raw[last]);
    let slope = result.growth_slope(slope_start(args.collisions));
    let raw_slope = result.raw_growth_slope(slope_start(args.collisions));
    eprintln!(
        "trajectories={} collisions={} off_diagonal_ratio={} growth_slope={} raw_growth_slope={} censored_steps={}",
        result.trajectories, args.collisions, ratio, slope, raw_slope, result.censored_steps
    );
    if args.json.is_some() {
        let summary = json!({
            "config": config,
            "off_diagonal_ratio": ratio,
            "growth_slope": slope,
            "raw_growth_slope": raw_slope,
            "censored_steps": result.censored_steps,
            "final_superdiffusive": result.normalized(last, Normalization::Superdiffusive),
            "final_diffusive": result.normalized(last, Normalization::Diffusive),
        });
        write_to(&args.json, to_json(&summary).as_bytes())?;
    }
    Ok(EXIT_PASS)
}

fn measure_summary(
    stats: &FlightStats,
    exponent: f64,
    window: (f64, f64),
    horizon: Horizon,
) -> Result<MeasureSummary, CliError> {
    let (fixed, free) = match horizon {
        Horizon::Finite => (None, None),
        Horizon::Infinite => (
            Some(fit_tail(&stats.curve, ExponentMode::Fixed(exponent), window)?),
            Some(fit_tail(&stats.curve, ExponentMode::Free, window)?),
        ),
    };
    Ok(MeasureSummary {
        samples: stats.samples(),
        censored: stats.censored,
        mean_flight: stats.mean_length(),
        max_flight: stats.max_length,
        fixed,
        free,
    })
}

pub fn verify_tolerances(args: &VerifyArgs) -> Tolerances {
    Tolerances {
        flow_exponent: args.tol_flow_exponent,
        map_exponent: args.tol_map_exponent,
        flow_constant: args.tol_flow_constant,
        map_constant: args.tol_map_constant,
        ratio: args.tol_ratio,
        mean_free_path: args.tol_mean_free_path,
        isotropy: args.tol_isotropy,
        flight_bound: args.flight_bound,
        ..Tolerances::default()
    }
}

fn scaled_theory(theory: &TailConstants, factor: f64) -> TailConstants {
    if factor == 1.0 {
        theory.clone()
    } else {
        theory.scaled(factor)
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let spec = args.lattice.spec()?;
    let flow = flight_config(&spec, Measure::Flow, args.samples, &args.run, &args.grid)?;
    let map = FlightConfig { measure: Measure::Map, ..flow.clone() };
    let tolerances = verify_tolerances(args);
    let config = json!({
        "command": "verify",
        "lattice": lattice_json(&spec),
        "samples": args.samples,
        "seed": args.run.seed,
        "cap": args.run.cap,
        "t_min": args.grid.t_min,
        "bins_per_decade": args.grid.bins_per_decade,
        "trajectories": args.trajectories,
        "collisions": args.collisions,
        "flow_window": [args.flow_window.0, args.flow_window.1],
        "map_window": [args.map_window.0, args.map_window.1],
        "tolerances": tolerances,
        "theory_scale": args.theory_scale,
    });
    if args.run.dump_config {
        dump(&config)?;
        return Ok(EXIT_PASS);
    }
    let workers = args.run.workers()?;
    let spectrum = enumerate_corridors(&spec).map_err(|e| CliError::config(e.to_string()))?;
    let theory = scaled_theory(&tail_constants(&spectrum), args.theory_scale);

    let flow_stats = simulate_flights(&flow, workers)?;
    let map_stats = simulate_flights(&map, workers)?;
    let diffusion = if args.trajectories > 0 {
        let cfg = DiffusionConfig {
            lattice: spec.clone(),
            measure: Measure::Map,
            trajectories: args.trajectories,
            collisions: args.collisions,
            seed: args.run.seed,
            cap: args.run.cap,
        };
        let result = run_diffusion(&cfg, workers)?;
        let last = result.checkpoints.len() - 1;
        Some(DiffusionSummary {
            trajectories: args.trajectories as usize,
            collisions: args.collisions,
            covariance: result.normalized(last, Normalization::Superdiffusive),
            growth_slope: result.growth_slope(slope_start(args.collisions)),
            raw_growth_slope: result.raw_growth_slope(slope_start(args.collisions)),
        })
    } else {
        None
    };
    let observations = Observations {
        flow: Some(measure_summary(&flow_stats, -1.0, args.flow_window, theory.horizon)?),
        map: Some(measure_summary(&map_stats, -2.0, args.map_window, theory.horizon)?),
        diffusion,
    };
    let report = compare_report(config, &theory, &observations, &tolerances);
    write_to(&args.output, to_json(&report).as_bytes())?;
    let mut err = io::stderr().lock();
    for check in &report.checks {
        let verdict = match check.status {
            crate::stats::CheckStatus::Pass => "pass",
            crate::stats::CheckStatus::Fail => "FAIL",
            crate::stats::CheckStatus::NotApplicable => "not applicable",
            crate::stats::CheckStatus::Info => "info",
        };
        let observed = check.observed.map_or("-".to_string(), |x| format!("{x:.6}"));
        let target = check.target.map_or("-".to_string(), |x| format!("{x:.6}"));
        writeln!(err, "{:<20} {:>14} {:>14}  {verdict}", check.name, observed, target)?;
    }
    Ok(if report.passed { EXIT_PASS } else { EXIT_VERIFY_FAILED })
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Corridors(a) => cmd_corridors(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Tailfit(a) => cmd_tailfit(a),
        Command::Diffusion(a) => cmd_diffusion(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
