//! Differential-privacy primitives.
//!
//! The Gaussian mechanism in both its `(epsilon, delta)` and Rényi-DP forms,
//! additive composition of RDP guarantees, the RDP-to-DP conversion, and the
//! classical advanced composition theorem used as a baseline accountant.
//!
//! All privacy losses are in natural log units. Everything here is a pure
//! function of its inputs and safe to call from any number of threads.

mod compose;
mod gaussian;
mod types;

pub use compose::{advanced_composition, compose_rdp, compose_rdp_sum, rdp_to_dp};
pub use gaussian::{gm_dp_epsilon, gm_rdp_epsilon};
pub use types::{DpBudget, GaussianMechanismSpec, RdpCurve, RdpPoint};

use thiserror::Error;

/// Domain errors for privacy computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("epsilon must be finite and nonnegative, got {0}")]
    InvalidEpsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("budget delta must lie in [0, 1), got {0}")]
    InvalidBudgetDelta(f64),
    #[error("Renyi order alpha must be finite and greater than 1, got {0}")]
    InvalidAlpha(f64),
    #[error("sensitivity must be finite and positive, got {0}")]
    InvalidSensitivity(f64),
    #[error("noise standard deviation must be finite and positive, got {0}")]
    InvalidNoiseStd(f64),
    #[error("RDP curve grid must be nonempty")]
    EmptyGrid,
    #[error("RDP curve orders must be strictly increasing integers >= 2, got {0}")]
    InvalidGridOrder(f64),
    #[error("RDP curves must share the same alpha grid")]
    GridMismatch,
    #[error("composition requires at least one step")]
    ZeroSteps,
}

pub type Result<T> = std::result::Result<T, Error>;
