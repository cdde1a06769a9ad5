//! Photon-number statistics, Fisher information and loss-degraded estimation
//! sensitivity of the dark port of a two-path interferometer fed with a strong
//! coherent beam and squeezed vacuum.
//!
//! Conventions used throughout the crate: `X = (a + a†)/2`, `Y = (a - a†)/(2i)`,
//! vacuum variance `1/4`, `D(x) = exp(x(a† - a))` shifts `<X>` by `x`, and
//! `S(r) = exp((r/2)(a² - a†²))` squeezes `X` so that `ΔX₀ = e^(-r)/2`.
//!
//! Module map:
//!
//! * [`squeezing`] and [`gaussian`]: squeezing constants, the two-mode
//!   interferometer on Gaussian states, phase to displacement mapping.
//! * [`fock`] and [`hermite`]: exact photon-number amplitudes and zero points.
//! * [`truncated`]: brute-force truncated Fock-space oracles.
//! * [`semiclassics`]: WKB-style approximations and interference-minima geometry.
//! * [`loss`]: the photon-loss channel of a lossy number-resolving detector.
//! * [`fisher`]: classical/quantum Fisher information and the loss-reduction model.
//! * [`estimation`]: Monte Carlo phase estimation.

pub mod error;
pub mod estimation;
pub mod fisher;
pub mod fock;
pub mod gaussian;
pub mod hermite;
pub mod loss;
mod numeric;
pub mod semiclassics;
pub mod squeezing;
pub mod truncated;

pub use error::{Error, Result};
pub use fock::{PhotonDistribution, ZeroPoint, ZeroSet};
pub use loss::LossChannel;
pub use squeezing::SqueezedVacuumSpec;
