//! Exact photon-number statistics of the displaced squeezed vacuum
//! `|σ(x)⟩ = D(x)S(r)|0⟩`.
//!
//! The amplitudes are Gauss-Hermite functions
//!
//! ```text
//! ⟨n|σ(x)⟩ = (√(1-γ²) γⁿ / n!)^(1/2) Heₙ(2ζx) exp(-(2γ/(1+γ)) (ζx)²)
//! ```
//!
//! with `γ = tanh r` and `ζ = 1/√(1-e^(-4r))`. They are generated by the
//! recurrence `A_{n+1} = (2κx Aₙ - γ√n A_{n-1}) / √(n+1)` with `κ = ζ√γ`, which
//! stays finite as `r → 0` and then reduces to the coherent state with Poisson
//! statistics of mean `x²`.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::hermite::{hermite_e_zeros, scaled_recurrence, LogSigned};
use crate::squeezing::SqueezedVacuumSpec;

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const HARD_CUTOFF_LIMIT: usize = 1_000_000;

/// Highest squeezed number state order accepted by
/// [`displaced_squeezed_number_amplitudes`].
pub const MAX_SQUEEZED_NUMBER: usize = 32;

/// Amplitudes `⟨n|σ(x)⟩` for `n = 0..=cutoff` in `(sign, ln|·|)` form.
/// All amplitudes are real in this convention.
#[derive(Clone, Debug)]
pub struct AmplitudeSet {
    pub log_magnitude: Vec<f64>,
    pub sign: Vec<i8>,
    pub cutoff: usize,
}

impl AmplitudeSet {
    pub fn value(&self, n: usize) -> f64 {
        f64::from(self.sign[n]) * self.log_magnitude[n].exp()
    }

    pub fn probability(&self, n: usize) -> f64 {
        (2.0 * self.log_magnitude[n]).exp()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.cutoff).map(|n| self.value(n)).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..=self.cutoff).map(|n| self.probability(n)).collect()
    }

    fn from_log_signed(raw: LogSigned, offset: f64) -> Self {
        let cutoff = raw.len() - 1;
        let log_magnitude = raw.log_magnitude.into_iter().map(|l| l + offset).collect();
        Self {
            log_magnitude,
            sign: raw.sign,
            cutoff,
        }
    }
}

/// Amplitudes `⟨n|σ(x)⟩`, `n = 0..=cutoff`.
pub fn amplitudes(x: f64, spec: &SqueezedVacuumSpec, cutoff: usize) -> AmplitudeSet {
    let raw = scaled_recurrence(2.0 * spec.kappa() * x, spec.gamma(), cutoff);
    // (1-γ²)^(1/4) = sech(r)^(1/2)
    let offset = -0.5 * spec.r().cosh().ln() - spec.gauss_coefficient() * x * x;
    AmplitudeSet::from_log_signed(raw, offset)
}

/// Single amplitude `⟨n|σ(x)⟩`.
pub fn amplitude(n: usize, x: f64, spec: &SqueezedVacuumSpec) -> f64 {
    amplitudes(x, spec, n).value(n)
}

/// `∂ₓ⟨n|σ(x)⟩ = 2κ√n A_{n-1} - 2E x Aₙ` from `Heₙ' = n He_{n-1}`.
pub fn amplitude_derivatives(values: &[f64], x: f64, spec: &SqueezedVacuumSpec) -> Vec<f64> {
    let k2 = 2.0 * spec.kappa();
    let e2x = 2.0 * spec.gauss_coefficient() * x;
    (0..values.len())
        .map(|n| {
            let up = if n == 0 { 0.0 } else { k2 * (n as f64).sqrt() * values[n - 1] };
            up - e2x * values[n]
        })
        .collect()
}

/// Truncated photon-number distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
    pub cutoff: usize,
    /// `1 - Σ pₙ`, clamped at zero against round-off.
    pub norm_deficit: f64,
}

impl PhotonDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        let cutoff = probs.len().saturating_sub(1);
        Self {
            probs,
            cutoff,
            norm_deficit: (1.0 - total).max(0.0),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn moments(&self) -> Moments {
        moments(self)
    }
}

/// Photon-number mean and variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

pub fn moments(dist: &PhotonDistribution) -> Moments {
    let mean: f64 = dist.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let variance = dist
        .probs
        .iter()
        .enumerate()
        .map(|(n, p)| (n as f64 - mean).powi(2) * p)
        .sum();
    Moments { mean, variance }
}

/// Starting cutoff `⌈n̄ + 12Δn + 20⌉` from the closed-form moments.
pub fn initial_cutoff(x: f64, spec: &SqueezedVacuumSpec) -> usize {
    let mean = spec.mean_photon_number(x);
    let sd = spec.photon_number_variance(x).sqrt();
    (mean + 12.0 * sd + 20.0).ceil() as usize
}

/// Smallest cutoff on the doubling ladder whose norm deficit is within
/// `tail_tol`, together with the amplitudes at that cutoff.
fn resolve(x: f64, spec: &SqueezedVacuumSpec, tail_tol: f64) -> Result<AmplitudeSet> {
    check(tail_tol > 0.0, "tail_tol", tail_tol, "must be positive")?;
    check(x.is_finite(), "x", x, "must be finite")?;
    let mut cutoff = initial_cutoff(x, spec).min(HARD_CUTOFF_LIMIT);
    loop {
        let set = amplitudes(x, spec, cutoff);
        let total: f64 = (0..=cutoff).map(|n| set.probability(n)).sum();
        let deficit = (1.0 - total).max(0.0);
        if deficit <= tail_tol {
            return Ok(set);
        }
        if cutoff >= HARD_CUTOFF_LIMIT {
            return Err(Error::CutoffExceeded {
                limit: HARD_CUTOFF_LIMIT,
                deficit,
            });
        }
        cutoff = (cutoff * 2).min(HARD_CUTOFF_LIMIT);
    }
}

/// Cutoff chosen by the doubling policy for the given tolerance.
pub fn resolve_cutoff(x: f64, spec: &SqueezedVacuumSpec, tail_tol: f64) -> Result<usize> {
    Ok(resolve(x, spec, tail_tol)?.cutoff)
}

/// `pₙ(x) = |⟨n|σ(x)⟩|²` with the cutoff extended until the norm deficit is at
/// most `tail_tol`.
pub fn distribution(x: f64, spec: &SqueezedVacuumSpec, tail_tol: f64) -> Result<PhotonDistribution> {
    let set = resolve(x, spec, tail_tol)?;
    Ok(PhotonDistribution::from_probs(set.probabilities()))
}

/// `∂ₓpₙ` at the default tail tolerance.
pub fn distribution_derivative(x: f64, spec: &SqueezedVacuumSpec) -> Result<Vec<f64>> {
    Ok(pure_statistics(x, spec, DEFAULT_TAIL_TOL)?.first)
}

/// Probabilities together with their first and second `x`-derivatives.
#[derive(Clone, Debug)]
pub struct PureStatistics {
    pub dist: PhotonDistribution,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

pub fn pure_statistics(x: f64, spec: &SqueezedVacuumSpec, tail_tol: f64) -> Result<PureStatistics> {
    let cutoff = resolve_cutoff(x, spec, tail_tol)?;
    Ok(pure_statistics_with_cutoff(x, spec, cutoff))
}

/// As [`pure_statistics`] at a fixed cutoff.
pub fn pure_statistics_with_cutoff(x: f64, spec: &SqueezedVacuumSpec, cutoff: usize) -> PureStatistics {
    let a = amplitudes(x, spec, cutoff).values();
    let da = amplitude_derivatives(&a, x, spec);
    let k2 = 2.0 * spec.kappa();
    let e = spec.gauss_coefficient();
    let mut first = Vec::with_capacity(a.len());
    let mut second = Vec::with_capacity(a.len());
    for n in 0..a.len() {
        let up = if n == 0 { 0.0 } else { k2 * (n as f64).sqrt() * da[n - 1] };
        let dda = up - 2.0 * e * a[n] - 2.0 * e * x * da[n];
        first.push(2.0 * a[n] * da[n]);
        second.push(2.0 * (da[n] * da[n] + a[n] * dda));
    }
    let probs = a.iter().map(|v| v * v).collect();
    PureStatistics {
        dist: PhotonDistribution::from_probs(probs),
        first,
        second,
    }
}

/// A zero `x_{n,k}` of `pₙ(x)`; `k` counts from large displacements inward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoint {
    pub n: usize,
    pub k: usize,
    pub x: f64,
}

/// Zeros of `pₙ(x)` on `x >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub n: usize,
    /// Strictly positive zeros, descending in `x` (`k = 1` is the largest).
    pub positive: Vec<ZeroPoint>,
    /// Zero at the origin (odd `n`, or any `n >= 1` for a coherent state).
    pub origin: Option<ZeroPoint>,
}

impl ZeroSet {
    /// Positive zeros followed by the origin, if present.
    pub fn all(&self) -> impl Iterator<Item = &ZeroPoint> {
        self.positive.iter().chain(self.origin.iter())
    }
}

/// Zero points `x_{n,k} = z_{n,k} / (2ζ)` of `pₙ(x)` from the zeros of `Heₙ`.
pub fn zeros(n: usize, spec: &SqueezedVacuumSpec) -> ZeroSet {
    if n == 0 {
        return ZeroSet {
            n,
            positive: Vec::new(),
            origin: None,
        };
    }
    if spec.r() == 0.0 {
        // coherent state: pₙ ∝ x^(2n)
        return ZeroSet {
            n,
            positive: Vec::new(),
            origin: Some(ZeroPoint { n, k: 1, x: 0.0 }),
        };
    }
    let half_width = 0.5 * spec.one_minus_exp_m4r().sqrt();
    let positive: Vec<ZeroPoint> = hermite_e_zeros(n)
        .into_iter()
        .take(n / 2)
        .enumerate()
        .map(|(i, z)| ZeroPoint {
            n,
            k: i + 1,
            x: half_width * z,
        })
        .collect();
    let origin = (n % 2 == 1).then(|| ZeroPoint {
        n,
        k: positive.len() + 1,
        x: 0.0,
    });
    ZeroSet { n, positive, origin }
}

/// `⟨n|D(x)S(r)|m⟩` for `n = 0..=cutoff`.
///
/// Built from `|σ(x)⟩` with the ladder `D S a† S† D† = cosh r (a† - x) + sinh r (a - x)`,
/// so `|Φ_m(x)⟩ = B†|Φ_{m-1}(x)⟩ / √m`.
pub fn displaced_squeezed_number_amplitudes(
    m: usize,
    x: f64,
    spec: &SqueezedVacuumSpec,
    cutoff: usize,
) -> Result<Vec<f64>> {
    if m > MAX_SQUEEZED_NUMBER {
        return Err(Error::UnsupportedOrder(m));
    }
    let mut v = amplitudes(x, spec, cutoff + m).values();
    let (c, s) = (spec.r().cosh(), spec.r().sinh());
    let shift = x * spec.r().exp();
    for level in 1..=m {
        let len = v.len() - 1;
        let next: Vec<f64> = (0..len)
            .map(|n| {
                let down = if n == 0 { 0.0 } else { c * (n as f64).sqrt() * v[n - 1] };
                (down + s * ((n + 1) as f64).sqrt() * v[n + 1] - shift * v[n]) / (level as f64).sqrt()
            })
            .collect();
        v = next;
    }
    v.truncate(cutoff + 1);
    Ok(v)
}

/// Single amplitude `⟨n|D(x)S(r)|m⟩`.
pub fn displaced_squeezed_number_amplitude(n: usize, m: usize, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    // pad so the ladder has room above n
    Ok(displaced_squeezed_number_amplitudes(m, x, spec, n + 1)?[n])
}
