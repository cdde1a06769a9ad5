//! Brute-force oracles on a truncated Fock space.
//!
//! Nothing here shares code with the recurrences in [`crate::fock`] or the
//! binomial kernel in [`crate::loss`]: states are built by exponentiating the
//! truncated generators directly, and loss is applied through Kraus operators.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check, Error, Result};
use crate::loss::LossChannel;
use crate::squeezing::SqueezedVacuumSpec;

/// Largest tail mass accepted by [`brute_force_state`].
pub const STATE_TAIL_TOL: f64 = 1e-12;
/// Largest tail mass accepted by the density-operator oracles.
pub const DENSITY_TAIL_TOL: f64 = 1e-10;

/// Real generator with a band of half-width 2, stored as `(offset, coefficients)`.
/// `(G v)[n] = Σ coef[n] v[n + offset]`.
struct Banded {
    bands: Vec<(isize, Vec<f64>)>,
    norm_bound: f64,
}

impl Banded {
    /// `(r/2)(a² - a†²)`
    fn squeeze(r: f64, dim: usize) -> Self {
        let up: Vec<f64> = (0..dim).map(|n| 0.5 * r * (((n + 1) * (n + 2)) as f64).sqrt()).collect();
        let down: Vec<f64> = (0..dim)
            .map(|n| if n >= 2 { -0.5 * r * ((n * (n - 1)) as f64).sqrt() } else { 0.0 })
            .collect();
        Self {
            bands: vec![(2, up), (-2, down)],
            norm_bound: r * dim as f64,
        }
    }

    /// `x(a† - a)`
    fn displace(x: f64, dim: usize) -> Self {
        let create: Vec<f64> = (0..dim).map(|n| x * (n as f64).sqrt()).collect();
        let annihilate: Vec<f64> = (0..dim).map(|n| -x * ((n + 1) as f64).sqrt()).collect();
        Self {
            bands: vec![(-1, create), (1, annihilate)],
            norm_bound: 2.0 * x.abs() * (dim as f64).sqrt(),
        }
    }

    fn apply(&self, v: &[f64], scale: f64) -> Vec<f64> {
        let dim = v.len() as isize;
        let mut out = vec![0.0; v.len()];
        for (offset, coef) in &self.bands {
            for n in 0..dim {
                let j = n + offset;
                if j >= 0 && j < dim {
                    out[n as usize] += scale * coef[n as usize] * v[j as usize];
                }
            }
        }
        out
    }
}

/// `exp(G) v` by a Taylor series on substeps of norm at most 1/2.
fn expm_action(g: &Banded, v: &[f64]) -> Vec<f64> {
    let steps = (2.0 * g.norm_bound).ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut w = v.to_vec();
    for _ in 0..steps {
        let mut term = w.clone();
        let mut acc = w.clone();
        for k in 1..60 {
            term = g.apply(&term, h / k as f64);
            let size = term.iter().map(|t| t.abs()).fold(0.0, f64::max);
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            if size < 1e-18 {
                break;
            }
        }
        w = acc;
    }
    w
}

fn tail_mass(probs: impl Iterator<Item = f64>, from: usize) -> f64 {
    probs.skip(from).sum()
}

fn check_tail(v: &[f64], tol: f64) -> Result<()> {
    let from = (v.len() * 9) / 10;
    let tail = tail_mass(v.iter().map(|c| c * c), from);
    if tail > tol {
        return Err(Error::TailTooLarge { tail, tolerance: tol });
    }
    Ok(())
}

fn squeezed_displaced(m: usize, x: f64, spec: &SqueezedVacuumSpec, dim: usize) -> Result<Vec<f64>> {
    check(dim > m + 2, "dim", dim as f64, "must exceed the initial number state")?;
    let mut v = vec![0.0; dim];
    v[m] = 1.0;
    let v = expm_action(&Banded::squeeze(spec.r(), dim), &v);
    Ok(expm_action(&Banded::displace(x, dim), &v))
}

/// `D(x) S(r) |m⟩` on a `dim`-dimensional Fock space. Errors when more than
/// `1e-12` of the norm sits in the top tenth of the space.
pub fn brute_force_state(m: usize, x: f64, spec: &SqueezedVacuumSpec, dim: usize) -> Result<Vec<f64>> {
    let v = squeezed_displaced(m, x, spec, dim)?;
    check_tail(&v, STATE_TAIL_TOL)?;
    Ok(v)
}

/// `K_k|n⟩ = √C(n,k) ε^(k/2) (1-ε)^((n-k)/2) |n-k⟩`
fn kraus(v: &[f64], k: usize, eps: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let mut binom = 1.0f64;
    for n in k..v.len() {
        if n > k {
            binom *= n as f64 / (n - k) as f64;
        }
        let c = (binom * eps.powf(k as f64) * (1.0 - eps).powf((n - k) as f64)).sqrt();
        out[n - k] = c * v[n];
    }
    out
}

fn outer_sum(vs: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    let mut rho = DMatrix::zeros(dim, dim);
    for v in vs {
        let col = nalgebra::DVector::from_column_slice(v);
        rho += &col * col.transpose();
    }
    rho
}

fn kraus_branches(v: &[f64], eps: f64) -> Vec<Vec<f64>> {
    if eps == 0.0 {
        return vec![v.to_vec()];
    }
    (0..v.len())
        .map(|k| kraus(v, k, eps))
        .filter(|b| b.iter().any(|c| *c != 0.0))
        .collect()
}

/// Density matrix of `D(x)S(r)|0⟩` after the loss channel, built from Kraus
/// operators on a truncated space.
pub fn density_operator_oracle(
    x: f64,
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
    dim: usize,
) -> Result<DMatrix<f64>> {
    let v = squeezed_displaced(0, x, spec, dim)?;
    check_tail(&v, DENSITY_TAIL_TOL)?;
    Ok(outer_sum(&kraus_branches(&v, channel.epsilon()), dim))
}

/// Loss applied to `S(r)|0⟩` first, then displacement by `√(1-ε) x`.
pub fn displaced_after_loss_oracle(
    x: f64,
    spec: &SqueezedVacuumSpec,
    channel: &LossChannel,
    dim: usize,
) -> Result<DMatrix<f64>> {
    let v = squeezed_displaced(0, 0.0, spec, dim)?;
    let x_eff = channel.x_eff(x);
    let g = Banded::displace(x_eff, dim);
    let branches: Vec<Vec<f64>> = kraus_branches(&v, channel.epsilon())
        .iter()
        .map(|b| expm_action(&g, b))
        .collect();
    let rho = outer_sum(&branches, dim);
    let from = (dim * 9) / 10;
    let tail = tail_mass((0..dim).map(|n| rho[(n, n)]), from);
    if tail > DENSITY_TAIL_TOL {
        return Err(Error::TailTooLarge {
            tail,
            tolerance: DENSITY_TAIL_TOL,
        });
    }
    Ok(rho)
}

/// `½ Tr|a - b|` for real symmetric matrices.
pub fn trace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = a - b;
    0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
}
