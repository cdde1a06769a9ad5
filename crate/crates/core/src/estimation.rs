//! Monte Carlo estimation of the displacement from lossy photon counts.
//!
//! Each trial draws `N` outcomes from `Pₙ(ε, x_true)` and estimates `x` by
//! maximum likelihood (or by inverting the sample mean). The empirical
//! sensitivity `1/(N δ²x)` uses the mean squared error about `x_true`.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`): trial `t` of a run with
//! seed `s` uses `ChaCha8Rng::seed_from_u64(s)` on stream `t`, so results do
//! not depend on how trials are scheduled across threads.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::fisher;
use crate::fock::{self, PhotonDistribution, DEFAULT_TAIL_TOL};
use crate::loss::{self, LossChannel, LossKernel};
use crate::numeric::golden_section_min;
use crate::squeezing::SqueezedVacuumSpec;

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_GRID_POINTS: usize = 200;
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), stream = trial index";

const LOG_FLOOR: f64 = -700.0;
const REFINE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub r: f64,
    pub epsilon: f64,
    pub x_true: f64,
    pub n_samples: usize,
    pub n_trials: usize,
    pub seed: u64,
    /// `None` picks the default interval around `x_true`.
    #[serde(default)]
    pub search_interval: Option<(f64, f64)>,
}

impl ExperimentConfig {
    pub fn new(r: f64, epsilon: f64, x_true: f64) -> Self {
        Self {
            r,
            epsilon,
            x_true,
            n_samples: DEFAULT_SAMPLES,
            n_trials: DEFAULT_TRIALS,
            seed: 0,
            search_interval: None,
        }
    }

    pub fn spec(&self) -> Result<SqueezedVacuumSpec> {
        SqueezedVacuumSpec::new(self.r)
    }

    pub fn channel(&self) -> Result<LossChannel> {
        LossChannel::new(self.epsilon)
    }

    /// Checks the config and returns the search interval to use.
    pub fn validate(&self) -> Result<(f64, f64)> {
        self.spec()?;
        self.channel()?;
        check(self.n_samples >= 1, "n_samples", self.n_samples as f64, "must be at least 1")?;
        check(self.n_trials >= 2, "n_trials", self.n_trials as f64, "need two trials for an error bar")?;
        check(self.x_true.is_finite(), "x_true", self.x_true, "must be finite")?;
        let (lo, hi) = match self.search_interval {
            Some(iv) => iv,
            None => self.default_interval()?,
        };
        check(lo < hi, "search_interval", hi - lo, "must have positive width")?;
        check(
            self.x_true >= lo && self.x_true <= hi,
            "x_true",
            self.x_true,
            "must lie in the search interval",
        )?;
        Ok((lo, hi))
    }

    /// `[max(0, x - w - 1/2), x + w + 1/2]` with `w = 5/√(N·CFI)`, capped at 5.
    pub fn default_interval(&self) -> Result<(f64, f64)> {
        let cfi = fisher::exact_cfi(self.x_true, &self.spec()?, &self.channel()?)?;
        let w = (5.0 / (self.n_samples as f64 * cfi).sqrt()).min(5.0);
        Ok(((self.x_true - w - 0.5).max(0.0), self.x_true + w + 0.5))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub estimator: String,
    pub config: ExperimentConfig,
    pub search_interval: (f64, f64),
    pub rng: String,
    pub estimates: Vec<f64>,
    /// Mean squared error about `x_true`.
    pub mse: f64,
    /// `1/(N·mse)`.
    pub sensitivity: f64,
    /// Jackknife standard error of `sensitivity` over trials.
    pub standard_error: f64,
    pub predicted_cfi: f64,
    pub predicted_i_avg: f64,
}

impl EstimationReport {
    pub const CSV_HEADER: &'static str =
        "estimator,r,epsilon,x_true,n_samples,n_trials,seed,mse,sensitivity,standard_error,predicted_cfi,predicted_i_avg";

    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.estimator,
            c.r,
            c.epsilon,
            c.x_true,
            c.n_samples,
            c.n_trials,
            c.seed,
            self.mse,
            self.sensitivity,
            self.standard_error,
            self.predicted_cfi,
            self.predicted_i_avg
        )
    }

    /// `|sensitivity - predicted_cfi|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.sensitivity - self.predicted_cfi).abs() / self.standard_error
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw(dist: &PhotonDistribution, n_samples: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0u64; dist.len()];
    if n_samples == 0 {
        return counts;
    }
    let index = WeightedIndex::new(dist.probs.iter().map(|p| p.max(0.0))).expect("distribution has positive mass");
    for _ in 0..n_samples {
        counts[index.sample(rng)] += 1;
    }
    counts
}

/// Multinomial counts of `n_samples` outcomes, reproducible per seed.
pub fn sample(dist: &PhotonDistribution, n_samples: usize, seed: u64) -> Vec<u64> {
    draw(dist, n_samples, &mut stream_rng(seed, 0))
}

/// As [`sample`] on a given stream of the seed.
pub fn sample_stream(dist: &PhotonDistribution, n_samples: usize, seed: u64, stream: u64) -> Vec<u64> {
    draw(dist, n_samples, &mut stream_rng(seed, stream))
}

/// Log-likelihood of photon counts on a search interval, with the lossy
/// distribution tabulated once on a coarse grid.
pub struct Likelihood {
    spec: SqueezedVacuumSpec,
    kernel: LossKernel,
    cutoff: usize,
    grid: Vec<f64>,
    table: Vec<Vec<f64>>,
}

impl Likelihood {
    pub fn new(spec: &SqueezedVacuumSpec, channel: &LossChannel, interval: (f64, f64), grid_points: usize) -> Result<Self> {
        let (lo, hi) = interval;
        check(lo < hi, "search_interval", hi - lo, "must have positive width")?;
        check(grid_points >= 3, "grid_points", grid_points as f64, "need at least 3")?;
        let cutoff = fock::resolve_cutoff(lo.abs().max(hi.abs()), spec, DEFAULT_TAIL_TOL)?;
        let kernel = LossKernel::new(channel, cutoff);
        let grid = fisher::linspace(lo, hi, grid_points);
        let table = grid
            .par_iter()
            .map(|&x| log_probs(&loss::lossy_statistics_with_kernel(x, spec, &kernel, cutoff).dist.probs))
            .collect();
        Ok(Self {
            spec: *spec,
            kernel,
            cutoff,
            grid,
            table,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn eval(&self, counts: &[u64], x: f64) -> f64 {
        let st = loss::lossy_statistics_with_kernel(x, &self.spec, &self.kernel, self.cutoff);
        sum_log(counts, &log_probs(&st.dist.probs))
    }

    /// Maximum-likelihood estimate: best grid point, then golden-section
    /// refinement between its neighbours.
    pub fn estimate(&self, counts: &[u64]) -> Result<f64> {
        if counts.iter().all(|c| *c == 0) {
            return Err(Error::DegenerateLikelihood("no counts".into()));
        }
        let values: Vec<f64> = self.table.iter().map(|lp| sum_log(counts, lp)).collect();
        let (best, top) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let bottom = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !top.is_finite() || top - bottom < 1e-12 * top.abs().max(1.0) {
            return Err(Error::DegenerateLikelihood(format!(
                "log-likelihood on [{}, {}] ranges over [{bottom}, {top}]",
                self.grid[0],
                self.grid[self.grid.len() - 1]
            )));
        }
        let a = self.grid[best.saturating_sub(1)];
        let b = self.grid[(best + 1).min(self.grid.len() - 1)];
        let x = golden_section_min(|x| -self.eval(counts, x), a, b, REFINE_TOL);
        Ok(if self.eval(counts, x) >= top { x } else { self.grid[best] })
    }
}

fn log_probs(p: &[f64]) -> Vec<f64> {
    p.iter().map(|v| if *v > 0.0 { v.ln().max(LOG_FLOOR) } else { LOG_FLOOR }).collect()
}

fn sum_log(counts: &[u64], logp: &[f64]) -> f64 {
    counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(n, c)| *c as f64 * logp.get(n).copied().unwrap_or(LOG_FLOOR))
        .sum()
}

/// Maximum-likelihood `x̂` for one set of counts.
pub fn mle_estimate(
    counts: &[u64],
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
    search_interval: (f64, f64),
) -> Result<f64> {
    Likelihood::new(spec, channel, search_interval, DEFAULT_GRID_POINTS)?.estimate(counts)
}

/// `x̂ = √(m̄/(1-ε) - sinh²r)` from the sample mean `m̄`.
pub fn invert_mean(mean: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<f64> {
    let t = 1.0 - channel.epsilon();
    let reason = if t == 0.0 {
        Some("total loss leaves no displacement information")
    } else if mean / t < spec.r().sinh().powi(2) {
        Some("sample mean below the squeezed-vacuum photon number")
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::NotInvertible { mean, reason }),
        None => Ok((mean / t - spec.r().sinh().powi(2)).sqrt()),
    }
}

fn jackknife(errors_sq: &[f64], n_samples: usize) -> (f64, f64, f64) {
    let t = errors_sq.len() as f64;
    let total: f64 = errors_sq.iter().sum();
    let mse = total / t;
    let n = n_samples as f64;
    let loo: Vec<f64> = errors_sq.iter().map(|e| 1.0 / (n * (total - e) / (t - 1.0))).collect();
    let mean = loo.iter().sum::<f64>() / t;
    let var = (t - 1.0) / t * loo.iter().map(|s| (s - mean).powi(2)).sum::<f64>();
    (mse, 1.0 / (n * mse), var.sqrt())
}

fn run(cfg: &ExperimentConfig, estimator: &str, estimate: impl Fn(&[u64]) -> Result<f64> + Sync) -> Result<EstimationReport> {
    let interval = cfg.validate()?;
    let spec = cfg.spec()?;
    let channel = cfg.channel()?;
    let dist = loss::lossy_distribution(cfg.x_true, &spec, &channel, DEFAULT_TAIL_TOL)?;
    let estimates = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| estimate(&sample_stream(&dist, cfg.n_samples, cfg.seed, t as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let errors_sq: Vec<f64> = estimates.iter().map(|x| (x - cfg.x_true).powi(2)).collect();
    let (mse, sensitivity, standard_error) = jackknife(&errors_sq, cfg.n_samples);
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(Error::DegenerateLikelihood(format!(
            "every trial returned x_true exactly (mse = {mse})"
        )));
    }
    Ok(EstimationReport {
        estimator: estimator.into(),
        config: cfg.clone(),
        search_interval: interval,
        rng: RNG_ALGORITHM.into(),
        estimates,
        mse,
        sensitivity,
        standard_error,
        predicted_cfi: fisher::exact_cfi(cfg.x_true, &spec, &channel)?,
        predicted_i_avg: fisher::avg_photon_sensitivity(cfg.x_true, &spec, &channel)?,
    })
}

/// Repeated maximum-likelihood experiments.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EstimationReport> {
    let interval = cfg.validate()?;
    let likelihood = Likelihood::new(&cfg.spec()?, &cfg.channel()?, interval, DEFAULT_GRID_POINTS)?;
    run(cfg, "mle", |counts| likelihood.estimate(counts))
}

/// Repeated experiments with the mean-photon-number estimator.
pub fn run_avg_estimator(cfg: &ExperimentConfig) -> Result<EstimationReport> {
    check(cfg.x_true > 0.0, "x_true", cfg.x_true, "the mean is not invertible at x = 0")?;
    let spec = cfg.spec()?;
    let channel = cfg.channel()?;
    run(cfg, "avg", |counts| {
        let total: u64 = counts.iter().sum();
        let mean = counts.iter().enumerate().map(|(n, c)| n as f64 * *c as f64).sum::<f64>() / total as f64;
        invert_mean(mean, &spec, &channel)
    })
}
