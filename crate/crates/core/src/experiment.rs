//! Deterministic Monte Carlo drivers.
//!
//! Work is cut into fixed chunks of consecutive sample indices. Chunks run on
//! a pool of the requested size and are merged in index order, so results do
//! not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{free_flight, DynamicsError, Lattice, ParticleState, Walker};
use crate::lattice::{LatticeError, LatticeSpec};
use crate::sampling::{derive_seed, sample_state, Measure, SamplingError, SeedPlan};
use crate::stats::{
    log_log_slope, sample_covariance, thresholds, Normalization, StatsError, SurvivalCounter, SurvivalCurve,
};

/// Samples per work unit.
pub const CHUNK: u64 = 1 << 14;
/// Seed tag separating diffusion starts from flight samples.
const DIFFUSION_TAG: u64 = 0xD1FF;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlightConfig {
    pub lattice: LatticeSpec,
    pub measure: Measure,
    pub samples: u64,
    pub seed: u64,
    pub cap: f64,
    pub t_min: f64,
    pub bins_per_decade: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlightStats {
    pub curve: SurvivalCurve,
    pub censored: u64,
    pub sum_length: f64,
    pub max_length: f64,
}

impl FlightStats {
    pub fn samples(&self) -> u64 {
        self.curve.total
    }

    pub fn mean_length(&self) -> f64 {
        self.sum_length / self.curve.total as f64
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.curve.total as f64
    }
}

struct ChunkStats {
    counter: SurvivalCounter,
    censored: u64,
    sum_length: f64,
    max_length: f64,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))
}

fn chunk_ranges(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect()
}

fn flight_chunk<const D: usize>(
    lattice: &Lattice<D>,
    cfg: &FlightConfig,
    grid: &[f64],
    (from, to): (u64, u64),
) -> Result<ChunkStats, ExperimentError> {
    let mut out = ChunkStats { counter: SurvivalCounter::new(grid.to_vec()), censored: 0, sum_length: 0.0, max_length: 0.0 };
    for i in from..to {
        let state = sample_state(lattice, cfg.measure, SeedPlan::new(cfg.seed, i))?;
        let flight = free_flight(lattice, &state, cfg.cap)?;
        out.counter.record(flight.length, flight.censored);
        if flight.censored {
            out.censored += 1;
        }
        out.sum_length += flight.length;
        out.max_length = out.max_length.max(flight.length);
    }
    Ok(out)
}

fn run_flights<const D: usize>(cfg: &FlightConfig, workers: usize) -> Result<FlightStats, ExperimentError> {
    let lattice = Lattice::<D>::new(&cfg.lattice)?;
    let grid = thresholds(cfg.t_min, cfg.cap, cfg.bins_per_decade)?;
    let chunks = chunk_ranges(cfg.samples);
    let parts: Vec<ChunkStats> = pool(workers)?.install(|| {
        chunks
            .par_iter()
            .map(|&range| flight_chunk(&lattice, cfg, &grid, range))
            .collect::<Result<_, _>>()
    })?;
    let mut counter = SurvivalCounter::new(grid);
    let (mut censored, mut sum_length, mut max_length) = (0, 0.0, 0.0f64);
    for part in &parts {
        counter.merge(&part.counter);
        censored += part.censored;
        sum_length += part.sum_length;
        max_length = max_length.max(part.max_length);
    }
    Ok(FlightStats { curve: counter.finish(cfg.cap), censored, sum_length, max_length })
}

/// Draws `samples` initial conditions from the measure and records one free
/// flight from each.
pub fn simulate_flights(cfg: &FlightConfig, workers: usize) -> Result<FlightStats, ExperimentError> {
    if cfg.samples == 0 {
        return Err(StatsError::EmptyInput.into());
    }
    let spec = crate::lattice::validate_lattice(cfg.lattice.clone())?;
    match spec.dimension {
        2 => run_flights::<2>(cfg, workers),
        _ => run_flights::<3>(cfg, workers),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub lattice: LatticeSpec,
    pub measure: Measure,
    pub trajectories: u64,
    pub collisions: u64,
    pub seed: u64,
    pub cap: f64,
}

/// Log-spaced collision counts `>= 2`, ending at `collisions`.
pub fn checkpoints(collisions: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0u32..)
        .map(|k| 10f64.powf(f64::from(k) / 10.0).round() as u64)
        .take_while(|&n| n < collisions)
        .filter(|&n| n >= 2)
        .collect();
    out.push(collisions);
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionResult {
    pub dimension: usize,
    pub trajectories: u64,
    pub checkpoints: Vec<u64>,
    /// Unnormalized displacement covariance at each checkpoint.
    pub raw: Vec<Vec<Vec<f64>>>,
    /// Per-axis quartile-based variance `(IQR / 1.3489795)^2` at each checkpoint.
    pub robust: Vec<Vec<f64>>,
    pub censored_steps: u64,
}

impl DiffusionResult {
    pub fn normalized(&self, index: usize, normalization: Normalization) -> Vec<Vec<f64>> {
        let s = normalization.scale(self.checkpoints[index]);
        self.raw[index].iter().map(|row| row.iter().map(|c| c / s).collect()).collect()
    }

    pub fn trace(&self, index: usize) -> f64 {
        (0..self.dimension).map(|i| self.raw[index][i][i]).sum()
    }

    pub fn robust_trace(&self, index: usize) -> f64 {
        self.robust[index].iter().sum()
    }

    fn slope_of(&self, from: u64, value: impl Fn(usize) -> f64) -> f64 {
        let points: Vec<(f64, f64)> = self
            .checkpoints
            .iter()
            .enumerate()
            .filter(|(_, &n)| n >= from)
            .map(|(i, &n)| (n as f64, value(i)))
            .collect();
        log_log_slope(&points)
    }

    /// Log-log slope of the sample-variance trace against `n` over checkpoints `>= from`.
    pub fn raw_growth_slope(&self, from: u64) -> f64 {
        self.slope_of(from, |i| self.trace(i))
    }

    /// Log-log slope of the quartile-based variance trace against `n` over
    /// checkpoints `>= from`.
    pub fn growth_slope(&self, from: u64) -> f64 {
        self.slope_of(from, |i| self.robust_trace(i))
    }
}

fn diffusion_chunk<const D: usize>(
    lattice: &Lattice<D>,
    cfg: &DiffusionConfig,
    marks: &[u64],
    (from, to): (u64, u64),
) -> Result<(Vec<Vec<[f64; D]>>, u64), ExperimentError> {
    let seed = derive_seed(cfg.seed, DIFFUSION_TAG);
    let mut rows = vec![Vec::with_capacity((to - from) as usize); marks.len()];
    let mut censored = 0;
    for i in from..to {
        let start: ParticleState<D> = sample_state(lattice, cfg.measure, SeedPlan::new(seed, i))?;
        let mut walker = Walker::new(lattice, start, cfg.cap);
        for (k, &mark) in marks.iter().enumerate() {
            while walker.steps() < mark {
                walker.step()?;
            }
            rows[k].push(walker.displacement());
        }
        censored += walker.censored_steps();
    }
    Ok((rows, censored))
}

fn run_diffusion_d<const D: usize>(cfg: &DiffusionConfig, workers: usize) -> Result<DiffusionResult, ExperimentError> {
    let lattice = Lattice::<D>::new(&cfg.lattice)?;
    let marks = checkpoints(cfg.collisions);
    let chunk = (CHUNK / 64).max(1);
    let ranges: Vec<(u64, u64)> = (0..cfg.trajectories.div_ceil(chunk))
        .map(|c| (c * chunk, ((c + 1) * chunk).min(cfg.trajectories)))
        .collect();
    let parts = pool(workers)?.install(|| {
        ranges
            .par_iter()
            .map(|&range| diffusion_chunk(&lattice, cfg, &marks, range))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut censored_steps = 0;
    let mut all = vec![Vec::with_capacity(cfg.trajectories as usize); marks.len()];
    for (rows, c) in parts {
        censored_steps += c;
        for (k, r) in rows.into_iter().enumerate() {
            all[k].extend(r);
        }
    }
    let raw = all
        .iter()
        .map(|xs| sample_covariance(xs).iter().map(|row| row.to_vec()).collect())
        .collect();
    let robust = all
        .iter()
        .map(|xs| (0..D).map(|k| quartile_variance(xs.iter().map(|x| x[k]).collect())).collect())
        .collect();
    Ok(DiffusionResult { dimension: D, trajectories: cfg.trajectories, checkpoints: marks, raw, robust, censored_steps })
}

/// Gaussian-consistent variance from the interquartile range.
pub fn quartile_variance(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let iqr = quantile(&xs, 0.75) - quantile(&xs, 0.25);
    (iqr / 1.348_979_500_392_163_6).powi(2)
}

/// Linearly interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Runs independent billiard-map trajectories and records displacement
/// covariances at log-spaced collision counts.
pub fn run_diffusion(cfg: &DiffusionConfig, workers: usize) -> Result<DiffusionResult, ExperimentError> {
    if cfg.trajectories < 2 || cfg.collisions < 2 {
        return Err(StatsError::InsufficientTrajectories {
            trajectories: cfg.trajectories as usize,
            collisions: cfg.collisions,
        }
        .into());
    }
    let spec = crate::lattice::validate_lattice(cfg.lattice.clone())?;
    match spec.dimension {
        2 => run_diffusion_d::<2>(cfg, workers),
        _ => run_diffusion_d::<3>(cfg, workers),
    }
}
