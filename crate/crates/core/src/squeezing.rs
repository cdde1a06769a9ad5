//! Squeezed vacuum constants.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{check, Result};

/// Vacuum variance of either quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// A single-mode squeezed vacuum `S(r)|0⟩`, squeezed along `X`.
///
/// All derived constants are functions of the squeezing parameter alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedVacuumSpec {
    r: f64,
}

impl SqueezedVacuumSpec {
    pub fn new(r: f64) -> Result<Self> {
        check(r.is_finite() && r >= 0.0, "r", r, "squeezing must be finite and >= 0")?;
        Ok(Self { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `γ = tanh r`.
    pub fn gamma(&self) -> f64 {
        self.r.tanh()
    }

    /// `1 - e^(-4r)`, evaluated without cancellation for small `r`.
    pub(crate) fn one_minus_exp_m4r(&self) -> f64 {
        -(-4.0 * self.r).exp_m1()
    }

    /// `ζ = 1/√(1 - e^(-4r))`; infinite at `r = 0`.
    pub fn zeta(&self) -> f64 {
        1.0 / self.one_minus_exp_m4r().sqrt()
    }

    pub fn delta_x0(&self) -> f64 {
        0.5 * (-self.r).exp()
    }

    pub fn delta_y0(&self) -> f64 {
        0.5 * self.r.exp()
    }

    pub fn variance_y0(&self) -> f64 {
        0.25 * (2.0 * self.r).exp()
    }

    /// Photon-number uncertainty of the undisplaced squeezed vacuum.
    pub fn delta_n0(&self) -> f64 {
        (2.0 * self.r).sinh() / SQRT_2
    }

    /// Critical displacement where the mean-photon-number estimator reaches
    /// half of the quantum Fisher information.
    pub fn chi_c(&self) -> f64 {
        ((3.0 * self.r).exp() - (-self.r).exp()) / (2.0 * SQRT_2)
    }

    /// Quantum Fisher information for displacement, `16 ΔY₀² = 4 e^(2r)`.
    pub fn qfi(&self) -> f64 {
        4.0 * (2.0 * self.r).exp()
    }

    /// `κ = ζ √γ`, the slope multiplying `x` in the amplitude recurrence.
    /// Finite for every `r >= 0`, with limit `1/2` at `r = 0`.
    pub(crate) fn kappa(&self) -> f64 {
        if self.r == 0.0 {
            0.5
        } else {
            (self.gamma() / self.one_minus_exp_m4r()).sqrt()
        }
    }

    /// Coefficient `E` of the Gaussian factor `exp(-E x²)` in the amplitudes,
    /// `E = 2γζ²/(1+γ) = 1/(1 + e^(-2r))`.
    pub(crate) fn gauss_coefficient(&self) -> f64 {
        1.0 / (1.0 + (-2.0 * self.r).exp())
    }

    /// Closed-form mean photon number of `D(x)S(r)|0⟩`.
    pub fn mean_photon_number(&self, x: f64) -> f64 {
        x * x + self.r.sinh().powi(2)
    }

    /// Closed-form photon-number variance of `D(x)S(r)|0⟩`.
    pub fn photon_number_variance(&self, x: f64) -> f64 {
        x * x * (-2.0 * self.r).exp() + 0.5 * (2.0 * self.r).sinh().powi(2)
    }

    /// `|⟨0|D(x)S(r)|0⟩|²`, written directly in terms of the quadrature
    /// convention.
    pub fn vacuum_overlap(&self, x: f64) -> f64 {
        (1.0 / self.r.cosh()) * (-2.0 * x * x / (1.0 + (-2.0 * self.r).exp())).exp()
    }
}
