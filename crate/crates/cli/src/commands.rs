//! Single-output commands: `stats`, `zeros`, `fisher`, `simulate`.

use std::fmt;

use anyhow::Result;
use darkport::estimation::{self, EstimationReport, ExperimentConfig};
use darkport::fisher::{self, FisherCurve, FisherModes};
use darkport::{fock, loss, LossChannel, SqueezedVacuumSpec};
use serde::{Deserialize, Serialize};

use crate::output::{num, Format};

/// Outputs were produced but failed an internal check.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub names: Vec<String>,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant violated: {}", self.names.join(", "))
    }
}

impl std::error::Error for InvariantViolation {}

/// Rendered output plus the names of any failed invariants.
pub struct Rendered {
    pub content: String,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsParams {
    pub r: f64,
    pub x: f64,
    pub eps: f64,
    pub tail_tol: f64,
    pub format: Format,
}

#[derive(Serialize)]
struct StatsOutput<'a> {
    r: f64,
    epsilon: f64,
    x: f64,
    tail_tol: f64,
    cutoff: usize,
    norm_deficit: f64,
    mean: f64,
    variance: f64,
    probs: &'a [f64],
}

pub fn stats(p: &StatsParams) -> Result<Rendered> {
    let spec = SqueezedVacuumSpec::new(p.r)?;
    let channel = LossChannel::new(p.eps)?;
    let dist = loss::lossy_distribution(p.x, &spec, &channel, p.tail_tol)?;
    let mut violations = Vec::new();
    if dist.norm_deficit > p.tail_tol {
        violations.push("norm_deficit".to_string());
    }
    if dist.probs.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        violations.push("nonnegative_probabilities".to_string());
    }
    let content = match p.format {
        Format::Csv => {
            let mut s = String::from("n,p\n");
            for (n, v) in dist.probs.iter().enumerate() {
                s.push_str(&format!("{n},{}\n", num(*v)));
            }
            s
        }
        Format::Json => {
            let m = dist.moments();
            let out = StatsOutput {
                r: p.r,
                epsilon: p.eps,
                x: p.x,
                tail_tol: p.tail_tol,
                cutoff: dist.cutoff,
                norm_deficit: dist.norm_deficit,
                mean: m.mean,
                variance: m.variance,
                probs: &dist.probs,
            };
            serde_json::to_string_pretty(&out)? + "\n"
        }
    };
    Ok(Rendered { content, violations })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZerosParams {
    pub r: f64,
    pub n_max: usize,
    pub format: Format,
}

#[derive(Serialize)]
struct ZerosOutput {
    r: f64,
    n_max: usize,
    zeros: Vec<fock::ZeroPoint>,
}

pub fn zero_table(r: f64, n_max: usize) -> Result<Vec<fock::ZeroPoint>> {
    let spec = SqueezedVacuumSpec::new(r)?;
    Ok((1..=n_max).flat_map(|n| fock::zeros(n, &spec).all().copied().collect::<Vec<_>>()).collect())
}

pub fn zeros_csv(zeros: &[fock::ZeroPoint]) -> String {
    let mut s = String::from("n,k,x\n");
    for z in zeros {
        s.push_str(&format!("{},{},{}\n", z.n, z.k, num(z.x)));
    }
    s
}

pub fn zeros(p: &ZerosParams) -> Result<Rendered> {
    let zeros = zero_table(p.r, p.n_max)?;
    let content = match p.format {
        Format::Csv => zeros_csv(&zeros),
        Format::Json => {
            serde_json::to_string_pretty(&ZerosOutput {
                r: p.r,
                n_max: p.n_max,
                zeros,
            })? + "\n"
        }
    };
    Ok(Rendered {
        content,
        violations: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisherMode {
    Exact,
    Approx,
    Avg,
    All,
}

impl FisherMode {
    pub fn modes(self) -> FisherModes {
        match self {
            FisherMode::Exact => FisherModes {
                exact: true,
                approx: false,
                avg: false,
            },
            FisherMode::Approx => FisherModes {
                exact: false,
                approx: true,
                avg: false,
            },
            FisherMode::Avg => FisherModes {
                exact: false,
                approx: false,
                avg: true,
            },
            FisherMode::All => FisherModes::ALL,
        }
    }
}

impl std::str::FromStr for FisherMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(FisherMode::Exact),
            "approx" => Ok(FisherMode::Approx),
            "avg" => Ok(FisherMode::Avg),
            "all" => Ok(FisherMode::All),
            _ => Err(format!("unknown mode `{s}` (exact, approx, avg or all)")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FisherParams {
    pub r: f64,
    pub eps: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub mode: FisherMode,
    pub format: Format,
}

pub fn fisher_curve(p: &FisherParams) -> Result<FisherCurve> {
    anyhow::ensure!(p.points >= 1, "points must be at least 1");
    anyhow::ensure!(p.x_min <= p.x_max, "x_min must not exceed x_max");
    let spec = SqueezedVacuumSpec::new(p.r)?;
    let channel = LossChannel::new(p.eps)?;
    let xs = fisher::linspace(p.x_min, p.x_max, p.points);
    Ok(FisherCurve::compute(&spec, &channel, &xs, p.mode.modes())?)
}

pub fn fisher(p: &FisherParams) -> Result<Rendered> {
    let curve = fisher_curve(p)?;
    let violations = curve.violations().into_iter().map(String::from).collect();
    let content = match p.format {
        Format::Csv => curve.to_csv(),
        Format::Json => serde_json::to_string_pretty(&curve)? + "\n",
    };
    Ok(Rendered { content, violations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Avg,
}

impl std::str::FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mle" => Ok(Estimator::Mle),
            "avg" => Ok(Estimator::Avg),
            _ => Err(format!("unknown estimator `{s}` (mle or avg)")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateParams {
    pub experiment: ExperimentConfig,
    pub estimator: Estimator,
    pub format: Format,
}

pub fn run_simulation(experiment: &ExperimentConfig, estimator: Estimator) -> Result<EstimationReport> {
    Ok(match estimator {
        Estimator::Mle => estimation::run_experiment(experiment)?,
        Estimator::Avg => estimation::run_avg_estimator(experiment)?,
    })
}

pub fn simulate(p: &SimulateParams) -> Result<Rendered> {
    let report = run_simulation(&p.experiment, p.estimator)?;
    let mut violations = Vec::new();
    if !(report.sensitivity > 0.0 && report.sensitivity.is_finite()) {
        violations.push("positive_sensitivity".to_string());
    }
    if !report.standard_error.is_finite() {
        violations.push("finite_standard_error".to_string());
    }
    let content = match p.format {
        Format::Csv => format!("{}\n{}\n", EstimationReport::CSV_HEADER, report.csv_row()),
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    Ok(Rendered { content, violations })
}
