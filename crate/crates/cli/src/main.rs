//! `darkport`: photon-number statistics, Fisher information and estimation
//! data for displaced squeezed vacuum behind a lossy number-resolving detector.
//!
//! Exit codes: 0 success, 1 error (bad parameters, I/O, numerical failure),
//! 2 command-line usage error, 3 outputs written but an invariant check failed.

mod commands;
mod config;
mod figures;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use darkport::estimation::{ExperimentConfig, DEFAULT_SAMPLES, DEFAULT_TRIALS};
use darkport::fock::DEFAULT_TAIL_TOL;
use serde::Serialize;
use serde_json::Value;

use commands::{Estimator, FisherMode, InvariantViolation, Rendered};
use config::{resolve, resolve_opt, ConfigFile};
use output::{destination, emit, Format, RunManifest, OUT_DIR_ENV};

const DEFAULT_R: f64 = 1.0;
const DEFAULT_EPS: f64 = 0.002;

#[derive(Parser)]
#[command(name = "darkport", version, about = "Dark-port photon statistics and Fisher information")]
struct Cli {
    /// `key = value` config file; flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-number distribution p_n(x), or P_n under loss
    Stats(StatsArgs),
    /// Zero points x_{n,k} of p_n(x)
    Zeros(ZerosArgs),
    /// Fisher information curve on an x grid
    Fisher(FisherArgs),
    /// Monte Carlo estimation experiment
    Simulate(SimulateArgs),
    /// Data files behind a figure
    Figure(FigureArgs),
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; defaults to $DARKPORT_OUT_DIR/<name> or stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Photon loss rate (default 0 for this command)
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FisherArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<FisherMode>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    x_true: Option<f64>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lower end of the likelihood search interval
    #[arg(long)]
    x_lo: Option<f64>,
    #[arg(long)]
    x_hi: Option<f64>,
    #[arg(long, value_enum)]
    estimator: Option<Estimator>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FigureArgs {
    /// One of fig3, fig5, fig6, fig7a, fig7b, fig7c, fig7d, fig8a, fig8b
    id: String,
    /// Output directory; defaults to $DARKPORT_OUT_DIR or the current directory
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Also write a gnuplot script
    #[arg(long)]
    gnuplot: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_trials: Option<usize>,
}

fn params_map<T: Serialize>(p: &T) -> Result<BTreeMap<String, Value>> {
    match serde_json::to_value(p)? {
        Value::Object(m) => Ok(m.into_iter().collect()),
        other => Ok(BTreeMap::from([("value".to_string(), other)])),
    }
}

fn finish(
    rendered: Rendered,
    dest: Option<PathBuf>,
    command: &str,
    params: BTreeMap<String, Value>,
    seed: Option<u64>,
) -> Result<()> {
    emit(&rendered.content, dest.as_deref(), RunManifest::new(command, params, seed))?;
    if rendered.violations.is_empty() {
        Ok(())
    } else {
        Err(InvariantViolation {
            names: rendered.violations,
        }
        .into())
    }
}

fn load_config(path: Option<&PathBuf>, allowed: &[&str]) -> Result<Option<ConfigFile>> {
    path.map(|p| {
        let c = ConfigFile::load(p)?;
        c.check_keys(allowed)?;
        Ok(c)
    })
    .transpose()
}

fn run(cli: Cli) -> Result<()> {
    let cfg_path = cli.config.as_ref();
    match cli.command {
        Command::Stats(a) => {
            let cfg = load_config(cfg_path, &["r", "x", "eps", "tail_tol", "format"])?;
            let c = cfg.as_ref();
            let p = commands::StatsParams {
                r: resolve(a.r, c, "r", DEFAULT_R)?,
                x: resolve(a.x, c, "x", 0.0)?,
                eps: resolve(a.eps, c, "eps", 0.0)?,
                tail_tol: resolve(a.tail_tol, c, "tail_tol", DEFAULT_TAIL_TOL)?,
                format: resolve(a.out.format, c, "format", Format::Csv)?,
            };
            let dest = destination(a.out.out, &format!("stats.{}", p.format.extension()));
            finish(commands::stats(&p)?, dest, "stats", params_map(&p)?, None)
        }
        Command::Zeros(a) => {
            let cfg = load_config(cfg_path, &["r", "n_max", "format"])?;
            let c = cfg.as_ref();
            let p = commands::ZerosParams {
                r: resolve(a.r, c, "r", DEFAULT_R)?,
                n_max: resolve(a.n_max, c, "n_max", 10)?,
                format: resolve(a.out.format, c, "format", Format::Csv)?,
            };
            let dest = destination(a.out.out, &format!("zeros.{}", p.format.extension()));
            finish(commands::zeros(&p)?, dest, "zeros", params_map(&p)?, None)
        }
        Command::Fisher(a) => {
            let cfg = load_config(cfg_path, &["r", "eps", "x_min", "x_max", "points", "mode", "format"])?;
            let c = cfg.as_ref();
            let p = commands::FisherParams {
                r: resolve(a.r, c, "r", DEFAULT_R)?,
                eps: resolve(a.eps, c, "eps", DEFAULT_EPS)?,
                x_min: resolve(a.x_min, c, "x_min", 0.0)?,
                x_max: resolve(a.x_max, c, "x_max", 4.0)?,
                points: resolve(a.points, c, "points", 401)?,
                mode: resolve(a.mode, c, "mode", FisherMode::All)?,
                format: resolve(a.out.format, c, "format", Format::Csv)?,
            };
            let dest = destination(a.out.out, &format!("fisher.{}", p.format.extension()));
            finish(commands::fisher(&p)?, dest, "fisher", params_map(&p)?, None)
        }
        Command::Simulate(a) => {
            let keys = [
                "r", "eps", "x_true", "n_samples", "n_trials", "seed", "x_lo", "x_hi", "estimator", "format",
            ];
            let cfg = load_config(cfg_path, &keys)?;
            let c = cfg.as_ref();
            let x_true = resolve_opt(a.x_true, c, "x_true")?.context("x_true is required (flag or config)")?;
            let mut experiment = ExperimentConfig::new(
                resolve(a.r, c, "r", DEFAULT_R)?,
                resolve(a.eps, c, "eps", DEFAULT_EPS)?,
                x_true,
            );
            experiment.n_samples = resolve(a.n_samples, c, "n_samples", DEFAULT_SAMPLES)?;
            experiment.n_trials = resolve(a.n_trials, c, "n_trials", DEFAULT_TRIALS)?;
            experiment.seed = resolve(a.seed, c, "seed", 0)?;
            let lo = resolve_opt(a.x_lo, c, "x_lo")?;
            let hi = resolve_opt(a.x_hi, c, "x_hi")?;
            experiment.search_interval = match (lo, hi) {
                (None, None) => None,
                (Some(lo), Some(hi)) => Some((lo, hi)),
                _ => anyhow::bail!("x_lo and x_hi must be given together"),
            };
            let p = commands::SimulateParams {
                experiment,
                estimator: resolve(a.estimator, c, "estimator", Estimator::Mle)?,
                format: resolve(a.out.format, c, "format", Format::Json)?,
            };
            let dest = destination(a.out.out, &format!("simulate.{}", p.format.extension()));
            let seed = Some(p.experiment.seed);
            finish(commands::simulate(&p)?, dest, "simulate", params_map(&p)?, seed)
        }
        Command::Figure(a) => figure(a, cfg_path),
    }
}

fn figure(a: FigureArgs, cfg_path: Option<&PathBuf>) -> Result<()> {
    let cfg = load_config(cfg_path, &["seed", "n_samples", "n_trials"])?;
    let c = cfg.as_ref();
    let opts = figures::FigureOptions {
        seed: resolve(a.seed, c, "seed", 0)?,
        n_samples: resolve(a.n_samples, c, "n_samples", DEFAULT_SAMPLES)?,
        n_trials: resolve(a.n_trials, c, "n_trials", DEFAULT_TRIALS)?,
    };
    let data = figures::generate(&a.id, &opts)?;
    let dir = a
        .outdir
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut params = BTreeMap::new();
    params.insert("id".to_string(), Value::from(a.id.clone()));
    params.insert("n_samples".to_string(), Value::from(opts.n_samples));
    params.insert("n_trials".to_string(), Value::from(opts.n_trials));
    let mut manifest = RunManifest::new("figure", params, Some(opts.seed));
    let mut files = data.files;
    if a.gnuplot {
        files.push((format!("{}.gp", a.id), data.gnuplot));
    }
    for (name, content) in &files {
        let path = dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        manifest.outputs.push(path);
    }
    manifest.write(&dir.join(format!("{}.manifest.json", a.id)))?;
    if data.violations.is_empty() {
        Ok(())
    } else {
        Err(InvariantViolation {
            names: data.violations,
        }
        .into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvariantViolation>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
