use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("photon-number cutoff exceeded the hard limit {limit} (achieved norm deficit {deficit:e})")]
    CutoffExceeded { limit: usize, deficit: f64 },

    #[error("truncated Fock space too small: tail weight {tail:e} exceeds {tolerance:e}")]
    TailTooLarge { tail: f64, tolerance: f64 },

    #[error("non-physical Gaussian state: {0}")]
    NonPhysical(String),

    #[error("squeezed number state order m = {0} is not supported")]
    UnsupportedOrder(usize),

    #[error("degenerate likelihood: {0}")]
    DegenerateLikelihood(String),

    #[error("estimator cannot invert the observed mean photon number {mean}: {reason}")]
    NotInvertible { mean: f64, reason: &'static str },

    #[error("classically forbidden region: n + 1/2 = {level} is below (zeta x)^2 = {boundary}")]
    Forbidden { level: f64, boundary: f64 },

    #[error("negative probability {value:e} at n = {n}")]
    NegativeProbability { n: usize, value: f64 },
}

pub(crate) fn check(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
