//! Fisher information of displacement estimation with a (lossy) number-resolving
//! detector.
//!
//! * exact: `I_F = Σₙ (∂ₓPₙ)²/Pₙ` from the analytic derivatives of the lossy
//!   distribution;
//! * quantum bound: `H_F(ε) = 4e^(2 r_eff)`;
//! * average photon number: `(∂ₓn̄)²/Δn²`;
//! * loss-reduction model: `(1-ε)(H_F(ε) - Σₙ 𝓘ₙ δₙ)` with the per-outcome
//!   pure-state information `𝓘ₙ` at `(r_eff, x_eff)` and the sigmoid reduction
//!   factors `δₙ` built from the zero points of `pₙ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::fock::{self, ZeroSet, DEFAULT_TAIL_TOL};
use crate::loss::{self, LossChannel, LossKernel, LossyStatistics};
use crate::numeric::{bisect, golden_section_min};
use crate::squeezing::SqueezedVacuumSpec;

/// Probabilities below this count as exact zeros of the distribution.
pub const P_FLOOR: f64 = 1e-30;

/// Dips shallower than this fraction of `H_F(ε)` are left out of curve annotations.
pub const DIP_DEPTH_FLOOR: f64 = 1e-3;

/// Relative slack used when checking `I_avg <= I_F <= H_F`.
pub const ORDERING_TOL: f64 = 1e-6;

/// Per-outcome contributions `Iₙ = (∂ₓPₙ)²/Pₙ`.
///
/// Outcomes with `Pₙ < P_FLOOR` contribute `2∂²ₓpₙ` when `zero_limit` holds
/// the second derivatives of a pure distribution, and nothing otherwise.
pub fn outcome_fisher(probs: &[f64], first: &[f64], zero_limit: Option<&[f64]>) -> Result<Vec<f64>> {
    if probs.len() != first.len() || zero_limit.is_some_and(|z| z.len() != probs.len()) {
        return Err(Error::InvalidParameter {
            name: "first",
            value: first.len() as f64,
            reason: "probability and derivative vectors differ in length",
        });
    }
    probs
        .iter()
        .zip(first)
        .enumerate()
        .map(|(n, (&p, &d))| {
            if p < 0.0 {
                Err(Error::NegativeProbability { n, value: p })
            } else if p < P_FLOOR {
                Ok(zero_limit.map_or(0.0, |z| 2.0 * z[n]))
            } else {
                Ok(d * d / p)
            }
        })
        .collect()
}

pub fn classical_fisher(probs: &[f64], first: &[f64], zero_limit: Option<&[f64]>) -> Result<f64> {
    Ok(outcome_fisher(probs, first, zero_limit)?.iter().sum())
}

fn cfi_from_stats(stats: &LossyStatistics, channel: &LossChannel) -> Result<f64> {
    let limit = (channel.epsilon() == 0.0).then_some(stats.second.as_slice());
    classical_fisher(&stats.dist.probs, &stats.first, limit)
}

/// Exact classical Fisher information of the lossy photon counts.
pub fn exact_cfi(x: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<f64> {
    let stats = loss::lossy_statistics(x, spec, channel, DEFAULT_TAIL_TOL)?;
    cfi_from_stats(&stats, channel)
}

/// Per-outcome exact contributions `Iₙ(ε, x)`.
pub fn exact_outcome_fisher(x: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<Vec<f64>> {
    let stats = loss::lossy_statistics(x, spec, channel, DEFAULT_TAIL_TOL)?;
    let limit = (channel.epsilon() == 0.0).then_some(stats.second.as_slice());
    outcome_fisher(&stats.dist.probs, &stats.first, limit)
}

/// `H_F(ε) = 4√(((1-ε)e^(2r)+ε)/((1-ε)e^(-2r)+ε)) = 4e^(2 r_eff)`.
pub fn quantum_fisher(spec: &SqueezedVacuumSpec, channel: &LossChannel) -> f64 {
    let e = channel.epsilon();
    let r = spec.r();
    4.0 * (((1.0 - e) * (2.0 * r).exp() + e) / ((1.0 - e) * (-2.0 * r).exp() + e)).sqrt()
}

fn avg_from_stats(stats: &LossyStatistics) -> f64 {
    let m = stats.dist.moments();
    let slope: f64 = stats.first.iter().enumerate().map(|(n, d)| n as f64 * d).sum();
    if slope == 0.0 {
        0.0
    } else {
        slope * slope / m.variance
    }
}

/// `(∂ₓn̄)²/Δn²` from the moments of the lossy distribution.
pub fn avg_photon_sensitivity(x: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let stats = loss::lossy_statistics(x, spec, channel, DEFAULT_TAIL_TOL)?;
    Ok(avg_from_stats(&stats))
}

/// Closed form of [`avg_photon_sensitivity`]:
/// `4(1-ε)²x² / ((1-ε)²Δn² + ε(1-ε)n̄)` with the lossless moments `n̄`, `Δn²`.
pub fn avg_photon_sensitivity_closed_form(x: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> f64 {
    let t = 1.0 - channel.epsilon();
    let var = t * t * spec.photon_number_variance(x) + channel.epsilon() * t * spec.mean_photon_number(x);
    4.0 * t * t * x * x / var
}

/// `δₙ` from `1 - δₙ = Π_k d²/(d² + εβ)`, `d = |x_eff| - x_{n,k}`, over the
/// positive zeros of `pₙ` at `r_eff` and the origin for odd `n`.
pub fn reduction_factor(x_eff: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel, zeros: &ZeroSet) -> f64 {
    reduction_with_width(x_eff, channel.epsilon() * channel.beta(spec), zeros)
}

fn reduction_with_width(x_eff: f64, eps_beta: f64, zeros: &ZeroSet) -> f64 {
    if eps_beta == 0.0 {
        return 0.0;
    }
    let u = x_eff.abs();
    let keep: f64 = zeros
        .all()
        .map(|z| {
            let d2 = (u - z.x).powi(2);
            d2 / (d2 + eps_beta)
        })
        .product();
    1.0 - keep
}

/// Loss-reduction model of the Fisher information with cached zero points.
#[derive(Clone, Debug)]
pub struct ApproxFisherModel {
    channel: LossChannel,
    eff: SqueezedVacuumSpec,
    eps_beta: f64,
    qfi: f64,
    zeros: Vec<ZeroSet>,
}

impl ApproxFisherModel {
    /// Model valid for pure-state cutoffs up to `n_max`.
    pub fn new(spec: &SqueezedVacuumSpec, channel: &LossChannel, n_max: usize) -> Self {
        let eff = channel.effective_spec(spec);
        let zeros = (0..=n_max).into_par_iter().map(|n| fock::zeros(n, &eff)).collect();
        Self {
            channel: *channel,
            eff,
            eps_beta: channel.epsilon() * channel.beta(spec),
            qfi: quantum_fisher(spec, channel),
            zeros,
        }
    }

    pub fn n_max(&self) -> usize {
        self.zeros.len() - 1
    }

    /// Cutoff of the `(r_eff, x_eff)` pure state needed at displacement `x`.
    pub fn cutoff_for(&self, x: f64) -> Result<usize> {
        fock::resolve_cutoff(self.channel.x_eff(x), &self.eff, DEFAULT_TAIL_TOL)
    }

    /// `Δ_Q(ε, x_eff) = Σₙ 𝓘ₙ δₙ` at displacement `x`.
    pub fn reduction(&self, x: f64) -> Result<f64> {
        if self.eps_beta == 0.0 {
            return Ok(0.0);
        }
        let x_eff = self.channel.x_eff(x);
        let cutoff = self.cutoff_for(x)?;
        if cutoff > self.n_max() {
            return Err(Error::CutoffExceeded {
                limit: self.n_max(),
                deficit: f64::NAN,
            });
        }
        let a = fock::amplitudes(x_eff, &self.eff, cutoff).values();
        let da = fock::amplitude_derivatives(&a, x_eff, &self.eff);
        let floor = 1e-16 * self.qfi;
        Ok(da
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let info = 4.0 * d * d;
                if info < floor {
                    0.0
                } else {
                    info * reduction_with_width(x_eff, self.eps_beta, &self.zeros[n])
                }
            })
            .sum())
    }

    /// `(1-ε)(H_F(ε) - Δ_Q(ε, x_eff))`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok((1.0 - self.channel.epsilon()) * (self.qfi - self.reduction(x)?))
    }
}

/// Approximate Fisher information at a single displacement.
pub fn approx_fisher(x: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<f64> {
    let eff = channel.effective_spec(spec);
    let cutoff = fock::resolve_cutoff(channel.x_eff(x), &eff, DEFAULT_TAIL_TOL)?;
    ApproxFisherModel::new(spec, channel, cutoff).eval(x)
}

/// A loss-induced dip in the Fisher information.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipAnnotation {
    pub n: usize,
    pub k: usize,
    /// `x_{n,k}(r_eff)/√(1-ε)`.
    pub x_dip: f64,
    /// `𝓘ₙ` of the `(r_eff, x_{n,k})` pure state; the Fisher information drops
    /// by `(1-ε)` times this at the dip.
    pub depth: f64,
}

/// Dips for `n = 1..=n_max`, ordered by `n` then `k`.
pub fn dip_annotations(spec: &SqueezedVacuumSpec, channel: &LossChannel, n_max: usize) -> Vec<DipAnnotation> {
    let eff = channel.effective_spec(spec);
    let scale = channel.x_eff_scale();
    if scale == 0.0 {
        return Vec::new();
    }
    (1..=n_max)
        .into_par_iter()
        .flat_map_iter(|n| {
            let zs = fock::zeros(n, &eff);
            zs.all()
                .map(|z| {
                    let a = fock::amplitudes(z.x, &eff, n).values();
                    let da = fock::amplitude_derivatives(&a, z.x, &eff);
                    DipAnnotation {
                        n,
                        k: z.k,
                        x_dip: z.x / scale,
                        depth: 4.0 * da[n] * da[n],
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn find_zero(n: usize, k: usize, eff: &SqueezedVacuumSpec) -> Result<f64> {
    fock::zeros(n, eff)
        .all()
        .find(|z| z.k == k)
        .map(|z| z.x)
        .ok_or(Error::InvalidParameter {
            name: "k",
            value: k as f64,
            reason: "no such zero of p_n",
        })
}

/// Position of the local minimum of the lossy `Pₙ(x)` next to the predicted
/// dip `x_{n,k}/√(1-ε)`, where `∂ₓPₙ = 0` and the outcome carries no
/// information.
pub fn locate_dip(n: usize, k: usize, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<f64> {
    let e = channel.epsilon();
    check(e > 0.0 && e < 1.0, "epsilon", e, "dips exist only for 0 < epsilon < 1")?;
    let eff = channel.effective_spec(spec);
    let guess = find_zero(n, k, &eff)? / channel.x_eff_scale();
    if guess == 0.0 {
        return Ok(0.0);
    }
    let cutoff = fock::resolve_cutoff(guess + 1.0, spec, DEFAULT_TAIL_TOL)?.max(n + 20);
    let kernel = LossKernel::new(channel, cutoff);
    let slope = |x: f64| loss::lossy_statistics_with_kernel(x, spec, &kernel, cutoff).first[n];
    let mut w = 0.5 * (e * channel.beta(spec)).sqrt() / channel.x_eff_scale();
    for _ in 0..6 {
        let lo = (guess - w).max(0.0);
        if let Some(x) = bisect(slope, lo, guess + w, 1e-14 * guess.max(1.0)) {
            return Ok(x);
        }
        w *= 2.0;
    }
    Err(Error::DegenerateLikelihood(format!(
        "no minimum of P_{n} bracketed near x = {guess}"
    )))
}

/// Sharpness coefficient fitted to the exact dip of outcome `n` at zero `k`.
///
/// The ratio of the exact lossy `Iₙ` to `(1-ε)𝓘ₙ` is sampled over
/// `±5√(εβ)` around the dip and fitted by `a·d²/(d² + εβ_fit)`.
pub fn fit_dip_sharpness(n: usize, k: usize, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<f64> {
    let e = channel.epsilon();
    check(e > 0.0 && e < 1.0, "epsilon", e, "dips exist only for 0 < epsilon < 1")?;
    let eff = channel.effective_spec(spec);
    let scale = channel.x_eff_scale();
    let zero = find_zero(n, k, &eff)?;
    let beta0 = channel.beta(spec);
    let w = (e * beta0).sqrt();
    let cutoff = fock::resolve_cutoff(zero / scale + 6.0 * w + 1.0, spec, DEFAULT_TAIL_TOL)?.max(n + 20);
    let kernel = LossKernel::new(channel, cutoff);
    let points = 201;
    let samples: Vec<(f64, f64)> = (0..points)
        .into_par_iter()
        .filter_map(|i| {
            let d = -5.0 * w + 10.0 * w * i as f64 / (points - 1) as f64;
            let x_eff = zero + d;
            let st = loss::lossy_statistics_with_kernel(x_eff / scale, spec, &kernel, cutoff);
            let p = st.dist.probs[n];
            if p < P_FLOOR {
                return None;
            }
            let exact = st.first[n].powi(2) / p;
            let a = fock::amplitudes(x_eff, &eff, n).values();
            let da = fock::amplitude_derivatives(&a, x_eff, &eff);
            let pure = (1.0 - e) * 4.0 * da[n] * da[n];
            (pure > 0.0).then_some((d, exact / pure))
        })
        .collect();
    let misfit = |log_beta: f64| {
        let eb = e * log_beta.exp();
        let f: Vec<f64> = samples.iter().map(|(d, _)| d * d / (d * d + eb)).collect();
        let ff: f64 = f.iter().map(|v| v * v).sum();
        let fr: f64 = f.iter().zip(&samples).map(|(v, (_, r))| v * r).sum();
        let a = fr / ff;
        f.iter().zip(&samples).map(|(v, (_, r))| (r - a * v).powi(2)).sum::<f64>()
    };
    let centre = beta0.ln();
    Ok(golden_section_min(misfit, centre - 4.0, centre + 4.0, 1e-8).exp())
}

/// Which columns a [`FisherCurve`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FisherModes {
    pub exact: bool,
    pub approx: bool,
    pub avg: bool,
}

impl FisherModes {
    pub const ALL: FisherModes = FisherModes {
        exact: true,
        approx: true,
        avg: true,
    };
}

/// Fisher information sampled on a displacement grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FisherCurve {
    pub r: f64,
    pub epsilon: f64,
    pub x_grid: Vec<f64>,
    pub cfi_exact: Option<Vec<f64>>,
    pub ifisher_approx: Option<Vec<f64>>,
    pub i_avg: Option<Vec<f64>>,
    pub qfi: Vec<f64>,
    pub dips: Vec<DipAnnotation>,
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl FisherCurve {
    pub fn compute(
        spec: &SqueezedVacuumSpec,
        channel: &LossChannel,
        x_grid: &[f64],
        modes: FisherModes,
    ) -> Result<Self> {
        for &x in x_grid {
            check(x.is_finite(), "x", x, "grid points must be finite")?;
        }
        let qfi = quantum_fisher(spec, channel);
        let need_exact = modes.exact || modes.avg;
        let (exact, avg) = if need_exact {
            let cutoffs = x_grid
                .par_iter()
                .map(|&x| fock::resolve_cutoff(x, spec, DEFAULT_TAIL_TOL))
                .collect::<Result<Vec<_>>>()?;
            let kernel = LossKernel::new(channel, cutoffs.iter().copied().max().unwrap_or(0));
            let pairs = x_grid
                .par_iter()
                .zip(&cutoffs)
                .map(|(&x, &cutoff)| {
                    let st = loss::lossy_statistics_with_kernel(x, spec, &kernel, cutoff);
                    let cfi = if modes.exact { cfi_from_stats(&st, channel)? } else { f64::NAN };
                    Ok((cfi, avg_from_stats(&st)))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let (c, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            (modes.exact.then_some(c), modes.avg.then_some(a))
        } else {
            (None, None)
        };
        let (approx, n_dips) = {
            let eff = channel.effective_spec(spec);
            let n_max = x_grid
                .par_iter()
                .map(|&x| fock::resolve_cutoff(channel.x_eff(x), &eff, DEFAULT_TAIL_TOL))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or(0);
            let approx = if modes.approx {
                let model = ApproxFisherModel::new(spec, channel, n_max);
                Some(x_grid.par_iter().map(|&x| model.eval(x)).collect::<Result<Vec<_>>>()?)
            } else {
                None
            };
            (approx, n_max)
        };
        let dips = if channel.epsilon() > 0.0 && channel.epsilon() < 1.0 && !x_grid.is_empty() {
            let lo = x_grid.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = x_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            dip_annotations(spec, channel, n_dips)
                .into_iter()
                .filter(|d| d.x_dip >= lo && d.x_dip <= hi && d.depth >= DIP_DEPTH_FLOOR * qfi)
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            r: spec.r(),
            epsilon: channel.epsilon(),
            x_grid: x_grid.to_vec(),
            cfi_exact: exact,
            ifisher_approx: approx,
            i_avg: avg,
            qfi: vec![qfi; x_grid.len()],
            dips,
        })
    }

    /// Names of violated ordering invariants (`I_avg <= I_F <= H_F`, and
    /// saturation of `H_F` at `ε = 0`).
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if let Some(cfi) = &self.cfi_exact {
            let q = self.qfi.first().copied().unwrap_or(0.0);
            if cfi.iter().any(|c| !c.is_finite() || *c > q * (1.0 + ORDERING_TOL)) {
                out.push("cfi_le_qfi");
            }
            if self.epsilon == 0.0 && cfi.iter().any(|c| ((c - q) / q).abs() > ORDERING_TOL) {
                out.push("cfi_saturates_qfi");
            }
            if let Some(avg) = &self.i_avg {
                if avg.iter().zip(cfi).any(|(a, c)| *a > c * (1.0 + ORDERING_TOL) + 1e-12) {
                    out.push("i_avg_le_cfi");
                }
            }
        }
        out
    }

    /// Header plus one row per grid point; columns that were not computed are
    /// left out. Numbers carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut cols: Vec<(&str, &[f64])> = vec![("x", &self.x_grid)];
        if let Some(v) = &self.cfi_exact {
            cols.push(("cfi_exact", v));
        }
        if let Some(v) = &self.ifisher_approx {
            cols.push(("ifisher_approx", v));
        }
        if let Some(v) = &self.i_avg {
            cols.push(("i_avg", v));
        }
        cols.push(("qfi", &self.qfi));
        let mut s = cols.iter().map(|(h, _)| *h).collect::<Vec<_>>().join(",");
        s.push('\n');
        for i in 0..self.x_grid.len() {
            let row: Vec<String> = cols.iter().map(|(_, v)| format!("{:.16e}", v[i])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}
