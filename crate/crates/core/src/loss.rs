//! Photon loss before a number-resolving detector.
//!
//! Each photon is lost independently with probability `ε`, so
//! `Pₙ = Σ_m C(m,n) (1-ε)ⁿ ε^(m-n) p_m`. The same channel maps the displaced
//! squeezed vacuum onto a displaced squeezed thermal state with thermal
//! coefficient `λ`, effective squeezing `r_eff` and displacement `√(1-ε) x`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::fock::{self, PhotonDistribution};
use crate::squeezing::SqueezedVacuumSpec;

/// Kernel entries below this are dropped.
const KERNEL_FLOOR: f64 = 1e-40;
/// Thermal weights are kept while `(1-λ)λ^m` exceeds this.
pub const THERMAL_WEIGHT_FLOOR: f64 = 1e-14;
/// Largest loss accepted by [`mixture_approx_distribution`].
pub const MIXTURE_MAX_EPSILON: f64 = 0.1;
const MIXTURE_WARN_EPSILON: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    epsilon: f64,
}

impl LossChannel {
    pub fn new(epsilon: f64) -> Result<Self> {
        check(
            (0.0..=1.0).contains(&epsilon),
            "epsilon",
            epsilon,
            "loss probability must lie in [0, 1]",
        )?;
        Ok(Self { epsilon })
    }

    pub fn lossless() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn x_eff_scale(&self) -> f64 {
        (1.0 - self.epsilon).sqrt()
    }

    pub fn x_eff(&self, x: f64) -> f64 {
        self.x_eff_scale() * x
    }

    /// `((1-ε)e^(-2r) + ε, (1-ε)e^(2r) + ε)`, the lossy quadrature variances
    /// in units of the vacuum variance.
    fn variances(&self, spec: &SqueezedVacuumSpec) -> (f64, f64) {
        let e = self.epsilon;
        let r = spec.r();
        ((1.0 - e) * (-2.0 * r).exp() + e, (1.0 - e) * (2.0 * r).exp() + e)
    }

    /// `s = √(1 + 4ε(1-ε) sinh²r) = (1+λ)/(1-λ)`, the purity inverse of the
    /// lossy state.
    fn thermal_factor(&self, spec: &SqueezedVacuumSpec) -> f64 {
        let e = self.epsilon;
        (1.0 + 4.0 * e * (1.0 - e) * spec.r().sinh().powi(2)).sqrt()
    }

    /// Thermal coefficient `λ`; `λ ≈ ε sinh²r` for small `ε`.
    pub fn lambda(&self, spec: &SqueezedVacuumSpec) -> f64 {
        let s = self.thermal_factor(spec);
        (s - 1.0) / (s + 1.0)
    }

    /// `r_eff = ¼ ln(((1-ε)e^(2r)+ε) / ((1-ε)e^(-2r)+ε))`
    pub fn r_eff(&self, spec: &SqueezedVacuumSpec) -> f64 {
        let (vx, vy) = self.variances(spec);
        (0.25 * (vy / vx).ln()).max(0.0)
    }

    pub fn effective_spec(&self, spec: &SqueezedVacuumSpec) -> SqueezedVacuumSpec {
        SqueezedVacuumSpec::new(self.r_eff(spec)).expect("r_eff is finite and non-negative")
    }

    /// Sharpness coefficient `β = sinh²r e^(-2 r_eff)`.
    pub fn beta(&self, spec: &SqueezedVacuumSpec) -> f64 {
        spec.r().sinh().powi(2) * (-2.0 * self.r_eff(spec)).exp()
    }

    /// Loss `ε₁` followed by `ε₂`.
    pub fn then(&self, other: &LossChannel) -> LossChannel {
        LossChannel {
            epsilon: 1.0 - (1.0 - self.epsilon) * (1.0 - other.epsilon),
        }
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Binomial loss matrix for inputs `m = 0..=m_max`.
///
/// Column `m` holds `C(m,n)(1-ε)ⁿε^(m-n)` for `n` in a window around its mode,
/// dropping entries below `1e-40`.
#[derive(Clone, Debug)]
pub struct LossKernel {
    epsilon: f64,
    columns: Vec<(usize, Vec<f64>)>,
}

impl LossKernel {
    pub fn new(channel: &LossChannel, m_max: usize) -> Self {
        let eps = channel.epsilon;
        let columns = if eps == 0.0 {
            (0..=m_max).map(|m| (m, vec![1.0])).collect()
        } else if eps == 1.0 {
            (0..=m_max).map(|_| (0, vec![1.0])).collect()
        } else {
            let lf = ln_factorials(m_max);
            let (lk, ll) = ((1.0 - eps).ln(), eps.ln());
            let odds = (1.0 - eps) / eps;
            (0..=m_max)
                .map(|m| {
                    let mode = (((m + 1) as f64) * (1.0 - eps)).floor().min(m as f64) as usize;
                    let peak = (lf[m] - lf[mode] - lf[m - mode] + mode as f64 * lk + (m - mode) as f64 * ll).exp();
                    let mut above = Vec::new();
                    let mut w = peak;
                    for n in mode..m {
                        w *= (m - n) as f64 / (n + 1) as f64 * odds;
                        if w < KERNEL_FLOOR {
                            break;
                        }
                        above.push(w);
                    }
                    let mut below = Vec::new();
                    w = peak;
                    for n in (1..=mode).rev() {
                        w *= n as f64 / (m - n + 1) as f64 / odds;
                        if w < KERNEL_FLOOR {
                            break;
                        }
                        below.push(w);
                    }
                    let start = mode - below.len();
                    below.reverse();
                    below.push(peak);
                    below.extend(above);
                    // absorbs round-off from the log-factorial table
                    let total: f64 = below.iter().sum();
                    below.iter_mut().for_each(|w| *w /= total);
                    (start, below)
                })
                .collect()
        };
        Self { epsilon: eps, columns }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn m_max(&self) -> usize {
        self.columns.len() - 1
    }

    /// `Σ_m K[n,m] v[m]` for `n = 0..=m_max`; `v` may be shorter than the kernel.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert!(v.len() <= self.columns.len(), "input longer than kernel");
        let mut out = vec![0.0; v.len()];
        for (m, (start, col)) in self.columns.iter().enumerate().take(v.len()) {
            let vm = v[m];
            if vm == 0.0 {
                continue;
            }
            for (j, w) in col.iter().enumerate() {
                out[start + j] += w * vm;
            }
        }
        out
    }
}

/// Lossy probabilities with their `x`-derivatives (binomial images of the pure ones).
#[derive(Clone, Debug)]
pub struct LossyStatistics {
    pub dist: PhotonDistribution,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

/// Statistics at a fixed pure-state cutoff, reusing a prebuilt kernel.
pub fn lossy_statistics_with_kernel(x: f64, spec: &SqueezedVacuumSpec, kernel: &LossKernel, cutoff: usize) -> LossyStatistics {
    let pure = fock::pure_statistics_with_cutoff(x, spec, cutoff);
    LossyStatistics {
        dist: PhotonDistribution::from_probs(kernel.apply(&pure.dist.probs)),
        first: kernel.apply(&pure.first),
        second: kernel.apply(&pure.second),
    }
}

/// `Pₙ` together with `∂ₓPₙ` and `∂²ₓPₙ`.
///
/// The pure-state cutoff is chosen so that its norm deficit is within
/// `tail_tol`; every column of the kernel sums to one, so the lossy deficit is
/// the same.
pub fn lossy_statistics(
    x: f64,
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
    tail_tol: f64,
) -> Result<LossyStatistics> {
    let cutoff = fock::resolve_cutoff(x, spec, tail_tol)?;
    let kernel = LossKernel::new(channel, cutoff);
    Ok(lossy_statistics_with_kernel(x, spec, &kernel, cutoff))
}

pub fn lossy_distribution(
    x: f64,
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
    tail_tol: f64,
) -> Result<PhotonDistribution> {
    Ok(lossy_statistics(x, spec, channel, tail_tol)?.dist)
}

pub fn lossy_distribution_derivative(x: f64, spec: &SqueezedVacuumSpec, channel: &LossChannel) -> Result<Vec<f64>> {
    Ok(lossy_statistics(x, spec, channel, fock::DEFAULT_TAIL_TOL)?.first)
}

/// Loss applied to an arbitrary distribution.
pub fn apply_loss(dist: &PhotonDistribution, channel: &LossChannel) -> PhotonDistribution {
    let kernel = LossKernel::new(channel, dist.cutoff);
    let probs = kernel.apply(&dist.probs);
    let total: f64 = probs.iter().sum();
    PhotonDistribution {
        probs,
        cutoff: dist.cutoff,
        norm_deficit: dist.norm_deficit.max(1.0 - total).max(0.0),
    }
}

/// The lossy state written as `Σ_m (1-λ)λ^m D(x_eff)S(r_eff)|m⟩⟨m|S†D†`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalDecomposition {
    pub lambda: f64,
    pub r_eff: f64,
    /// `(1-λ)λ^m` for `m = 0..=m_max`.
    pub weights: Vec<f64>,
}

impl ThermalDecomposition {
    pub fn m_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// Mean thermal occupation `λ/(1-λ)`.
    pub fn mean_occupation(&self) -> f64 {
        self.lambda / (1.0 - self.lambda)
    }
}

pub fn thermal_decomposition(spec: &SqueezedVacuumSpec, channel: &LossChannel) -> ThermalDecomposition {
    let lambda = channel.lambda(spec);
    let mut weights = vec![1.0 - lambda];
    if lambda > 0.0 {
        loop {
            let next = weights[weights.len() - 1] * lambda;
            if next <= THERMAL_WEIGHT_FLOOR {
                break;
            }
            weights.push(next);
        }
    }
    ThermalDecomposition {
        lambda,
        r_eff: channel.r_eff(spec),
        weights,
    }
}

/// Photon statistics of the displaced squeezed thermal state up to `cutoff`.
pub fn thermal_distribution(
    x: f64,
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
    cutoff: usize,
) -> Result<PhotonDistribution> {
    let dec = thermal_decomposition(spec, channel);
    let eff = channel.effective_spec(spec);
    let x_eff = channel.x_eff(x);
    let mut probs = vec![0.0; cutoff + 1];
    for (m, w) in dec.weights.iter().enumerate() {
        let amps = fock::displaced_squeezed_number_amplitudes(m, x_eff, &eff, cutoff)?;
        for (p, a) in probs.iter_mut().zip(&amps) {
            *p += w * a * a;
        }
    }
    Ok(PhotonDistribution::from_probs(probs))
}

/// First-order mixture of squeezed vacuum and squeezed single photon at
/// `(r_eff, x_eff)`, with weight `ε sinh²r` on the single photon.
pub fn mixture_approx_distribution(
    x: f64,
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
) -> Result<PhotonDistribution> {
    let eps = channel.epsilon;
    if eps > MIXTURE_MAX_EPSILON {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: eps,
            reason: "mixture approximation is limited to epsilon <= 0.1",
        });
    }
    if eps > MIXTURE_WARN_EPSILON {
        warn!("mixture approximation at epsilon = {eps} is outside its first-order regime");
    }
    let eff = channel.effective_spec(spec);
    let x_eff = channel.x_eff(x);
    let w1 = eps * spec.r().sinh().powi(2);
    let cutoff = fock::resolve_cutoff(x_eff, &eff, fock::DEFAULT_TAIL_TOL)? + 20;
    let a0 = fock::displaced_squeezed_number_amplitudes(0, x_eff, &eff, cutoff)?;
    let a1 = fock::displaced_squeezed_number_amplitudes(1, x_eff, &eff, cutoff)?;
    let probs = a0
        .iter()
        .zip(&a1)
        .map(|(u, v)| (1.0 - w1) * u * u + w1 * v * v)
        .collect();
    Ok(PhotonDistribution::from_probs(probs))
}

/// `½ Σ |aₙ - bₙ|` with missing entries treated as zero.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    0.5 * (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
