//! Gaussian description of the two-path interferometer and the mapping from
//! interferometer phase to dark-port displacement.
//!
//! Mode 1 carries the squeezed vacuum and becomes the dark port; mode 2 carries
//! the coherent beam. Phase-space vectors are ordered `(X₁, Y₁, X₂, Y₂)`.

use nalgebra::{Matrix2, Matrix4, SMatrix, SymmetricEigen, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::squeezing::{SqueezedVacuumSpec, VACUUM_VARIANCE};

/// Absolute tolerance on eigenvalues in the uncertainty-relation check.
pub const PHYSICALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    /// Real coherent amplitude in the bright input port.
    pub alpha: f64,
    /// Phase difference between the two arms, radians.
    pub phi: f64,
    pub r: f64,
}

impl InterferometerConfig {
    pub fn new(alpha: f64, phi: f64, r: f64) -> Result<Self> {
        check(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "must be positive")?;
        check(phi.abs() < std::f64::consts::PI, "phi", phi, "must satisfy |phi| < pi")?;
        SqueezedVacuumSpec::new(r)?;
        Ok(Self { alpha, phi, r })
    }

    pub fn spec(&self) -> SqueezedVacuumSpec {
        SqueezedVacuumSpec::new(self.r).expect("validated on construction")
    }

    /// Squeezed vacuum in mode 1, coherent state `|α⟩` in mode 2.
    pub fn input_state(&self) -> TwoModeGaussianState {
        TwoModeGaussianState::product(
            &SingleModeGaussian::squeezed_vacuum(&self.spec()),
            &SingleModeGaussian::coherent(self.alpha, 0.0),
        )
    }

    pub fn output_state(&self) -> TwoModeGaussianState {
        interferometer_transform(&self.input_state(), self.phi)
    }
}

/// Small-phase dark-port displacement `x = αφ/2`.
pub fn phase_to_displacement(cfg: &InterferometerConfig) -> f64 {
    0.5 * cfg.alpha * cfg.phi
}

/// Exact dark-port displacement `α sin(φ/2)`.
pub fn exact_displacement(cfg: &InterferometerConfig) -> f64 {
    cfg.alpha * (0.5 * cfg.phi).sin()
}

/// Converts a displacement sensitivity `1/Δx²` into a phase sensitivity `1/Δφ²`.
pub fn displacement_sensitivity_to_phase(inv_var_x: f64, alpha: f64) -> Result<f64> {
    check(inv_var_x >= 0.0, "inv_var_x", inv_var_x, "must be non-negative")?;
    Ok(0.25 * alpha * alpha * inv_var_x)
}

/// Critical phase `φ_c = 2χ_c/α = (e^(3r) - e^(-r)) / (√2 α)`.
pub fn critical_phase(spec: &SqueezedVacuumSpec, alpha: f64) -> Result<f64> {
    check(alpha > 0.0, "alpha", alpha, "must be positive")?;
    Ok(2.0 * spec.chi_c() / alpha)
}

/// Single-mode Gaussian state: mean `(⟨X⟩, ⟨Y⟩)` and covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleModeGaussian {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl SingleModeGaussian {
    pub fn vacuum() -> Self {
        Self {
            mean: Vector2::zeros(),
            cov: Matrix2::identity() * VACUUM_VARIANCE,
        }
    }

    pub fn coherent(x: f64, y: f64) -> Self {
        Self {
            mean: Vector2::new(x, y),
            ..Self::vacuum()
        }
    }

    pub fn squeezed_vacuum(spec: &SqueezedVacuumSpec) -> Self {
        Self {
            mean: Vector2::zeros(),
            cov: Matrix2::new(spec.delta_x0().powi(2), 0.0, 0.0, spec.delta_y0().powi(2)),
        }
    }

    /// `D(x)S(r)|0⟩`.
    pub fn displaced_squeezed(x: f64, spec: &SqueezedVacuumSpec) -> Self {
        Self {
            mean: Vector2::new(x, 0.0),
            ..Self::squeezed_vacuum(spec)
        }
    }

    /// `det(cov) >= 1/16` and positive diagonal, up to [`PHYSICALITY_TOL`].
    pub fn check_physical(&self) -> Result<()> {
        let sym = (self.cov[(0, 1)] - self.cov[(1, 0)]).abs() <= PHYSICALITY_TOL;
        let det = self.cov.determinant();
        if !sym || self.cov[(0, 0)] <= 0.0 || det < VACUUM_VARIANCE.powi(2) - PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!(
                "single-mode covariance {:?} violates the uncertainty relation",
                self.cov
            )));
        }
        Ok(())
    }
}

/// Fidelity between two single-mode Gaussian states.
///
/// Uses the closed form for single-mode Gaussian states written with vacuum
/// covariance equal to the identity, `F = 2 / (√(Δ+δ) - √δ) · exp(-½ uᵀ(V₁+V₂)⁻¹u)`,
/// `Δ = det(V₁+V₂)`, `δ = (det V₁ - 1)(det V₂ - 1)`.
pub fn gaussian_fidelity(a: &SingleModeGaussian, b: &SingleModeGaussian) -> Result<f64> {
    a.check_physical()?;
    b.check_physical()?;
    let scale = 1.0 / VACUUM_VARIANCE;
    let (va, vb) = (a.cov * scale, b.cov * scale);
    let sum = va + vb;
    let big_delta = sum.determinant();
    let small_delta = ((va.determinant() - 1.0) * (vb.determinant() - 1.0)).max(0.0);
    let u = (a.mean - b.mean) * scale.sqrt();
    let inv = sum
        .try_inverse()
        .ok_or_else(|| Error::NonPhysical("singular covariance sum".into()))?;
    let expo = -0.5 * (u.transpose() * inv * u)[(0, 0)];
    let f = 2.0 / ((big_delta + small_delta).sqrt() - small_delta.sqrt()) * expo.exp();
    Ok(f.min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeGaussianState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl TwoModeGaussianState {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        let s = Self { mean, cov };
        s.check_physical()?;
        Ok(s)
    }

    pub fn product(mode1: &SingleModeGaussian, mode2: &SingleModeGaussian) -> Self {
        let mut cov = Matrix4::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&mode1.cov);
        cov.fixed_view_mut::<2, 2>(2, 2).copy_from(&mode2.cov);
        Self {
            mean: Vector4::new(mode1.mean[0], mode1.mean[1], mode2.mean[0], mode2.mean[1]),
            cov,
        }
    }

    /// Symmetric covariance with `cov + (i/4)Ω ⪰ 0` within [`PHYSICALITY_TOL`].
    pub fn check_physical(&self) -> Result<()> {
        let asym = (self.cov - self.cov.transpose()).abs().max();
        if asym > PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!("covariance not symmetric (max asymmetry {asym:e})")));
        }
        // real embedding of the Hermitian matrix C + iB, B = Ω/4
        let mut b = Matrix4::zeros();
        for m in 0..2 {
            b[(2 * m, 2 * m + 1)] = VACUUM_VARIANCE;
            b[(2 * m + 1, 2 * m)] = -VACUUM_VARIANCE;
        }
        let mut big = SMatrix::<f64, 8, 8>::zeros();
        big.fixed_view_mut::<4, 4>(0, 0).copy_from(&self.cov);
        big.fixed_view_mut::<4, 4>(4, 4).copy_from(&self.cov);
        big.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-b));
        big.fixed_view_mut::<4, 4>(4, 0).copy_from(&b);
        let min = SymmetricEigen::new(big).eigenvalues.min();
        if min < -PHYSICALITY_TOL {
            return Err(Error::NonPhysical(format!(
                "uncertainty relation violated (min eigenvalue {min:e})"
            )));
        }
        Ok(())
    }
}

/// Mode transformation of the interferometer, a rotation by `φ/2` applied to
/// `(X₁, X₂)` and `(Y₁, Y₂)` so that `D(0, α)` becomes `D(α sin(φ/2), α cos(φ/2))`.
pub fn interferometer_matrix(phi: f64) -> Matrix4<f64> {
    let (s, c) = (0.5 * phi).sin_cos();
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, s, //
        -s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

pub fn interferometer_transform(state: &TwoModeGaussianState, phi: f64) -> TwoModeGaussianState {
    let t = interferometer_matrix(phi);
    TwoModeGaussianState {
        mean: t * state.mean,
        cov: t * state.cov * t.transpose(),
    }
}

/// Marginal state of mode 1 (the dark port).
pub fn reduce_dark_port(state: &TwoModeGaussianState) -> SingleModeGaussian {
    SingleModeGaussian {
        mean: Vector2::new(state.mean[0], state.mean[1]),
        cov: state.cov.fixed_view::<2, 2>(0, 0).into_owned(),
    }
}

/// Fidelity between the exact dark-port marginal and `D(x)S(r)|0⟩`.
pub fn dark_port_fidelity(state: &TwoModeGaussianState, spec: &SqueezedVacuumSpec, x: f64) -> Result<f64> {
    state.check_physical()?;
    gaussian_fidelity(
        &reduce_dark_port(state),
        &SingleModeGaussian::displaced_squeezed(x, spec),
    )
}
