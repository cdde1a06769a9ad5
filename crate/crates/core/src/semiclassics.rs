//! Semiclassical picture of the photon-number distribution.
//!
//! For `n + 1/2 > (ζx)²` the exact distribution is approximated by
//! `2ρ(n, ζx) cos²(S - π/4)`, where `ρ` is a coarse-grained envelope and
//! `S ≈ 2y³/(3ζx)` is the area between the photon-number circle and the line
//! `X = ζx`, with `y = √(n + 1/2 - (ζx)²)`. Minima of `pₙ` sit where
//! `S = (4k - 1)π/4`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::fock::PhotonDistribution;
use crate::squeezing::SqueezedVacuumSpec;

/// Displacements below this are treated as singular (`S ∝ 1/x`).
pub const MIN_DISPLACEMENT: f64 = 1e-6;

/// Slack on the floor in [`minima_count`] so that `y = y_min^(k)` counts `k`.
const COUNT_SLACK: f64 = 1e-9;

fn require_squeezing(spec: &SqueezedVacuumSpec) -> Result<()> {
    check(spec.r() > 0.0, "r", spec.r(), "semiclassical formulas need r > 0")
}

fn require_displacement(x: f64) -> Result<()> {
    check(
        x.is_finite() && x >= MIN_DISPLACEMENT,
        "x",
        x,
        "S(y, ζx) is singular at x = 0",
    )
}

/// `y² = n + 1/2 - u²` at the scaled displacement `u`.
fn y_squared(n: f64, u: f64) -> f64 {
    n + 0.5 - u * u
}

/// `y(n) = √(n + 1/2 - (ζx)²)`, or `None` in the classically forbidden region.
pub fn y_of_level(n: f64, x: f64, spec: &SqueezedVacuumSpec) -> Option<f64> {
    let y2 = y_squared(n, spec.zeta() * x);
    (y2 > 0.0).then(|| y2.sqrt())
}

/// Coarse-grained envelope `ρ(n, ζx)` with `ΔY² = e^(2r)/4`.
///
/// Normalized so that `∫ρ dn = 1` over the allowed region.
pub fn envelope(n: f64, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    require_squeezing(spec)?;
    let u = spec.zeta() * x;
    let y2 = y_squared(n, u);
    if y2 <= 0.0 {
        return Err(Error::Forbidden {
            level: n,
            boundary: u * u - 0.5,
        });
    }
    let var = spec.variance_y0();
    Ok((-y2 / (2.0 * var)).exp() / (2.0 * PI * y2 * var).sqrt())
}

/// Quantum phase `S(y, ζx) ≈ 2y³/(3ζx)`.
pub fn action(y: f64, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    require_squeezing(spec)?;
    require_displacement(x)?;
    check(y >= 0.0, "y", y, "must be non-negative")?;
    Ok(2.0 * y.powi(3) / (3.0 * spec.zeta() * x))
}

/// `2ρ(n, ζx) cos²(S - π/4)`, zero in the forbidden region.
pub fn wkb_probability(n: usize, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    require_squeezing(spec)?;
    require_displacement(x)?;
    match y_of_level(n as f64, x, spec) {
        None => Ok(0.0),
        Some(y) => {
            let s = action(y, x, spec)?;
            Ok(2.0 * envelope(n as f64, x, spec)? * (s - FRAC_PI_4).cos().powi(2))
        }
    }
}

/// Sampled semiclassical approximation for `n = 0..=n_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WkbApprox {
    pub x: f64,
    pub zeta_x: f64,
    /// `ρ(n, ζx)`, zero where forbidden.
    pub envelope: Vec<f64>,
    /// `S(y(n), ζx)`, zero where forbidden.
    pub action: Vec<f64>,
    pub approx_probs: Vec<f64>,
}

pub fn wkb_approx(x: f64, spec: &SqueezedVacuumSpec, n_max: usize) -> Result<WkbApprox> {
    require_squeezing(spec)?;
    require_displacement(x)?;
    let mut env = Vec::with_capacity(n_max + 1);
    let mut act = Vec::with_capacity(n_max + 1);
    let mut probs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        match y_of_level(n as f64, x, spec) {
            None => {
                env.push(0.0);
                act.push(0.0);
                probs.push(0.0);
            }
            Some(y) => {
                let rho = envelope(n as f64, x, spec)?;
                let s = action(y, x, spec)?;
                env.push(rho);
                act.push(s);
                probs.push(2.0 * rho * (s - FRAC_PI_4).cos().powi(2));
            }
        }
    }
    Ok(WkbApprox {
        x,
        zeta_x: spec.zeta() * x,
        envelope: env,
        action: act,
        approx_probs: probs,
    })
}

/// Number of destructive interferences below `y`: `⌊S/π + 1/4⌋`.
pub fn minima_count(y: f64, x: f64, spec: &SqueezedVacuumSpec) -> Result<usize> {
    let s = action(y, x, spec)?;
    Ok((s / PI + 0.25 + COUNT_SLACK).floor() as usize)
}

/// `y_min^(k) = ((4k - 1) 3πζx/8)^(1/3)`.
pub fn y_of_minimum(k: usize, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    require_squeezing(spec)?;
    require_displacement(x)?;
    check(k >= 1, "k", k as f64, "minima are counted from 1")?;
    Ok(((4 * k - 1) as f64 * 3.0 * PI * spec.zeta() * x / 8.0).cbrt())
}

/// `n_min^(k) = (ζx)² + (y_min^(k))² - 1/2`.
pub fn n_of_minimum(k: usize, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    let y = y_of_minimum(k, x, spec)?;
    Ok((spec.zeta() * x).powi(2) + y * y - 0.5)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimaGeometry {
    pub x: f64,
    pub y_min: Vec<f64>,
    pub n_min: Vec<f64>,
}

impl MinimaGeometry {
    /// Number of listed minima with `y_min <= y`.
    pub fn k_count(&self, y: f64) -> usize {
        self.y_min.iter().take_while(|&&v| v <= y).count()
    }
}

pub fn minima_geometry(x: f64, spec: &SqueezedVacuumSpec, k_max: usize) -> Result<MinimaGeometry> {
    let y_min = (1..=k_max).map(|k| y_of_minimum(k, x, spec)).collect::<Result<Vec<_>>>()?;
    let u2 = (spec.zeta() * x).powi(2);
    let n_min = y_min.iter().map(|y| u2 + y * y - 0.5).collect();
    Ok(MinimaGeometry { x, y_min, n_min })
}

/// `χ_ΔY = 8ΔY³/(9πζ)`: the displacement that puts the first minimum at `y = ΔY`.
pub fn chi_delta_y(spec: &SqueezedVacuumSpec) -> Result<f64> {
    require_squeezing(spec)?;
    Ok(8.0 * spec.delta_y0().powi(3) / (9.0 * PI * spec.zeta()))
}

/// Normal density in `n` with the exact mean and variance of `pₙ(x)`.
pub fn gaussian_approx(n: f64, x: f64, spec: &SqueezedVacuumSpec) -> f64 {
    let mean = spec.mean_photon_number(x);
    let var = spec.photon_number_variance(x);
    (-(n - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

pub fn gaussian_approx_probs(x: f64, spec: &SqueezedVacuumSpec, n_max: usize) -> Vec<f64> {
    (0..=n_max).map(|n| gaussian_approx(n as f64, x, spec)).collect()
}

/// Phase difference `Δτ = 2 arccos(x/√(n + 1/2))` between the two
/// intersections of the line `X = x` with the circle of photon number `n`, and
/// the predicted fringe spacing `Δν = 2π/Δτ`.
pub fn phase_gap(n: f64, x: f64) -> Result<(f64, f64)> {
    let radius = (n + 0.5).sqrt();
    if (n + 0.5).partial_cmp(&(x * x)) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Forbidden {
            level: n,
            boundary: x * x - 0.5,
        });
    }
    let dtau = 2.0 * (x.abs() / radius).acos();
    Ok((dtau, 2.0 * PI / dtau))
}

/// Probability of photon numbers strictly below `n_min^(1)`.
pub fn mass_below_first_minimum(dist: &PhotonDistribution, x: f64, spec: &SqueezedVacuumSpec) -> Result<f64> {
    let n_min = n_of_minimum(1, x, spec)?;
    Ok(dist.probs.iter().enumerate().take_while(|(n, _)| (*n as f64) < n_min).map(|(_, p)| p).sum())
}

/// Separation `(n_min^(1) - n̄)/Δn` at `x = χ_c` using the large-squeezing
/// moments `n̄ = χ_c² + ΔY² - 1/2` and `Δn = 2ΔY²`; tends to about 2.07.
pub fn first_minimum_offset_large_r(spec: &SqueezedVacuumSpec) -> Result<f64> {
    let chi = spec.chi_c();
    let n_min = n_of_minimum(1, chi, spec)?;
    let var = spec.variance_y0();
    let mean = chi * chi + var - 0.5;
    Ok((n_min - mean) / (2.0 * var))
}

/// Positions of local minima of an exact distribution, excluding the ends.
pub fn local_minima(probs: &[f64]) -> Vec<usize> {
    (1..probs.len().saturating_sub(1))
        .filter(|&n| probs[n] < probs[n - 1] && probs[n] <= probs[n + 1])
        .collect()
}

/// First local minimum after the highest peak.
pub fn first_minimum_after_peak(probs: &[f64]) -> Option<usize> {
    let peak = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(n, _)| n)?;
    local_minima(probs).into_iter().find(|&n| n > peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{self, DEFAULT_TAIL_TOL};

    fn spec(r: f64) -> SqueezedVacuumSpec {
        SqueezedVacuumSpec::new(r).unwrap()
    }

    /// Midpoint rule; avoids evaluating at the turning point.
    fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn envelope_normalization() {
        let s = spec(1.0);
        let x = 2.0;
        let u = s.zeta() * x;
        // n = u² - 1/2 + y², dn = 2y dy
        let density = |y: f64| envelope(u * u - 0.5 + y * y, x, &s).unwrap() * 2.0 * y;
        let total = midpoint(density, 0.0, 20.0, 20000);
        assert!((total - 1.0).abs() < 1e-6, "total = {total}");
        let second = midpoint(|y| y * y * density(y), 0.0, 20.0, 20000);
        assert!((second / s.variance_y0() - 1.0).abs() < 0.01);
        assert!(envelope(u * u - 0.6, x, &s).is_err());
        assert!(envelope(u * u + 1000.0, x, &s).unwrap() < 1e-40);
    }

    #[test]
    fn action_landmarks() {
        let s = spec(1.0);
        assert_eq!(action(0.0, 1.0, &s).unwrap(), 0.0);
        let y = (9.0 * PI * s.zeta() * 1.3 / 8.0).cbrt();
        assert!((action(y, 1.3, &s).unwrap() - 0.75 * PI).abs() < 1e-12);
        assert!(action(1.0, 0.0, &s).is_err());
        assert_eq!(minima_count(0.5 * y, 1.3, &s).unwrap(), 0);
        let y1 = y_of_minimum(1, 1.3, &s).unwrap();
        assert_eq!(minima_count(y1, 1.3, &s).unwrap(), 1);
        assert!((y1 - y).abs() < 1e-14);
    }

    #[test]
    fn wkb_minimum_near_exact_zero() {
        // p₆ vanishes at x = 1.65 (r = 1); the predicted first minimum sits at n ≈ 5.6
        let s = spec(1.0);
        let x = 1.65;
        assert!((n_of_minimum(1, x, &s).unwrap() - 6.0).abs() < 0.5);
        let max = (0..40).map(|n| wkb_probability(n, x, &s).unwrap()).fold(0.0, f64::max);
        assert!(wkb_probability(6, x, &s).unwrap() <= 0.07 * max);
    }

    #[test]
    fn minima_monotone_in_x_and_k() {
        let s = spec(0.8);
        let mut last = 0.0;
        for i in 1..50 {
            let y = y_of_minimum(1, 0.1 * i as f64, &s).unwrap();
            assert!(y > last);
            last = y;
        }
        let g = minima_geometry(2.0, &s, 6).unwrap();
        assert!(g.y_min.windows(2).all(|w| w[1] > w[0]));
        for (y, n) in g.y_min.iter().zip(&g.n_min) {
            assert!((n - ((s.zeta() * 2.0).powi(2) + y * y - 0.5)).abs() < 1e-12);
        }
        assert_eq!(g.k_count(g.y_min[2]), 3);
    }

    #[test]
    fn chi_delta_y_relations() {
        for r in [0.5, 0.8, 1.0] {
            let s = spec(r);
            let a = chi_delta_y(&s).unwrap();
            let b = 2.0 * 2f64.sqrt() / (9.0 * PI) * s.zeta() * s.chi_c();
            assert!((a - b).abs() < 1e-12 * b);
        }
        let big = spec(5.0);
        let ratio = big.chi_c() / chi_delta_y(&big).unwrap();
        assert!((ratio / 10.0 - 1.0).abs() < 0.01, "ratio = {ratio}");
        let s = spec(1.0);
        let y = y_of_minimum(1, chi_delta_y(&s).unwrap(), &s).unwrap();
        assert!((y - s.delta_y0()).abs() < 1e-12);
        assert_eq!(minima_count(s.delta_y0(), chi_delta_y(&s).unwrap(), &s).unwrap(), 1);
        assert!(chi_delta_y(&spec(0.0)).is_err());
    }

    #[test]
    fn geometry_at_critical_displacement() {
        let s = spec(4.0);
        let ratio = y_of_minimum(1, s.chi_c(), &s).unwrap() / s.delta_y0();
        assert!((ratio - 2.154).abs() < 1e-3);
        let offset = first_minimum_offset_large_r(&s).unwrap();
        assert!((offset - 2.07).abs() < 0.01, "offset = {offset}");
    }

    #[test]
    fn phase_gap_limits() {
        let (dtau, dnu) = phase_gap(3.0, 0.0).unwrap();
        assert!((dtau - PI).abs() < 1e-15 && (dnu - 2.0).abs() < 1e-15);
        let (_, far) = phase_gap(1e8, 1.0).unwrap();
        assert!((far - 2.0).abs() < 1e-3);
        assert!(phase_gap(0.0, 1.0).is_err());
        let s = spec(0.8);
        let x = 1.14 * s.zeta();
        let n1 = n_of_minimum(1, 1.14, &s).unwrap();
        let (_, first) = phase_gap(n1, x).unwrap();
        let (_, later) = phase_gap(n1 + 30.0, x).unwrap();
        assert!(first > 2.5 && first < 3.5, "first = {first}");
        assert!(later < first && later > 2.0);
    }

    #[test]
    fn gaussian_mass_and_improvement() {
        let s = spec(0.8);
        let tv = |x: f64| {
            let exact = fock::distribution(x, &s, DEFAULT_TAIL_TOL).unwrap();
            let g = gaussian_approx_probs(x, &s, exact.cutoff);
            let mass: f64 = g.iter().sum();
            (0.5 * exact.probs.iter().zip(&g).map(|(a, b)| (a - b).abs()).sum::<f64>(), mass)
        };
        let chi = s.chi_c();
        let (at_chi, mass) = tv(chi);
        assert!((mass - 1.0).abs() < 1e-3);
        let mut last = at_chi;
        for m in [1.5, 2.0, 3.0] {
            let (d, mass) = tv(m * chi);
            assert!((mass - 1.0).abs() < 1e-3);
            assert!(d <= last, "tv not improving at {m} chi_c");
            last = d;
        }
    }

    fn max_error(approx: &[f64], exact: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
        (0..exact.len())
            .filter(|&n| keep(n))
            .map(|n| (approx[n] - exact[n]).abs())
            .fold(0.0, f64::max)
    }

    /// Levels at least `ΔY` away from the turning point in `y`.
    fn away_from_turning_point(x: f64, s: &SqueezedVacuumSpec) -> impl Fn(usize) -> bool + '_ {
        move |n| y_of_level(n as f64, x, s).is_some_and(|y| y >= s.delta_y0())
    }

    #[test]
    fn zeta_scaled_argument_fits_better() {
        // compares y from ζx (as used here) with y from the unscaled x, on levels
        // where both variants are clear of their turning points
        for r in [0.8, 1.0] {
            let s = spec(r);
            let mut err_scaled = 0.0;
            let mut err_plain = 0.0;
            for x in [1.16, 1.65, 2.5] {
                let exact = fock::distribution(x, &s, DEFAULT_TAIL_TOL).unwrap();
                let scaled = wkb_approx(x, &s, exact.cutoff).unwrap();
                let plain = wkb_approx(x / s.zeta(), &s, exact.cutoff).unwrap();
                let keep_a = away_from_turning_point(x, &s);
                let keep_b = away_from_turning_point(x / s.zeta(), &s);
                for n in (0..exact.len()).filter(|&n| keep_a(n) && keep_b(n)) {
                    err_scaled += (scaled.approx_probs[n] - exact.probs[n]).powi(2);
                    err_plain += (plain.approx_probs[n] - exact.probs[n]).powi(2);
                }
            }
            assert!(err_scaled <= err_plain, "r={r}: {err_scaled} vs {err_plain}");
        }
    }

    #[test]
    fn wkb_fits_fringe_region() {
        let s = spec(0.8);
        let small = fock::distribution(1.14, &s, DEFAULT_TAIL_TOL).unwrap();
        let w = wkb_approx(1.14, &s, small.cutoff).unwrap();
        assert!(max_error(&w.approx_probs, &small.probs, away_from_turning_point(1.14, &s)) <= 0.08);
        // the 1/y envelope singularity dominates right at the turning point
        assert!(max_error(&w.approx_probs, &small.probs, |n| n >= 1) > 0.5);
        let mid = fock::distribution(1.62, &s, DEFAULT_TAIL_TOL).unwrap();
        let w = wkb_approx(1.62, &s, mid.cutoff).unwrap();
        assert!(max_error(&w.approx_probs, &mid.probs, |n| n > 4) <= 0.05);
    }

    #[test]
    fn gaussian_fits_critical_displacement() {
        let s = spec(0.8);
        let x = 3.74;
        let exact = fock::distribution(x, &s, DEFAULT_TAIL_TOL).unwrap();
        let g = gaussian_approx_probs(x, &s, exact.cutoff);
        let off_fringe = |n: usize| !(19..=21).contains(&n);
        let err = max_error(&g, &exact.probs, off_fringe);
        assert!(err <= 0.02, "err = {err}");
        let w = wkb_approx(x, &s, exact.cutoff).unwrap();
        let keep = away_from_turning_point(x, &s);
        assert!(max_error(&w.approx_probs, &g, |n| off_fringe(n) && keep(n)) <= 0.07);
    }

    #[test]
    fn first_minimum_tracks_exact() {
        for r in [0.8, 1.0] {
            let s = spec(r);
            let top = 3.0 * s.chi_c();
            let steps = 24;
            for i in 0..=steps {
                let x = 1.0 + (top - 1.0) * i as f64 / steps as f64;
                let exact = fock::distribution(x, &s, DEFAULT_TAIL_TOL).unwrap();
                let found = first_minimum_after_peak(&exact.probs).unwrap() as f64;
                // the exact minimum is a photon number; compare with the nearest one
                let predicted = n_of_minimum(1, x, &s).unwrap().round();
                assert!((found - predicted).abs() <= 1.0, "r={r} x={x}: {found} vs {predicted}");
            }
        }
    }

    #[test]
    fn mass_below_first_minimum_at_chi_delta_y() {
        let s = spec(1.0);
        let x = chi_delta_y(&s).unwrap();
        let d = fock::distribution(x, &s, DEFAULT_TAIL_TOL).unwrap();
        let m = mass_below_first_minimum(&d, x, &s).unwrap();
        assert!((m - 0.68).abs() <= 0.05, "mass = {m}");
    }
}
