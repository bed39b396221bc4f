//! Multi-round privacy accounting for iterated subsampled Gaussian
//! mechanisms.
//!
//! One round is an RDP curve over an integer order grid; `T` rounds compose
//! by scaling that curve; the reported `(epsilon, delta)` at each horizon is
//! the conversion minimized over the grid. A classical advanced-composition
//! baseline is included for comparison against the RDP route.

use privacy_core::{advanced_composition, gm_dp_epsilon, GaussianMechanismSpec, RdpCurve};
use subsampled_gaussian::SampledGmSpec;
use thiserror::Error;

/// Errors from accounting runs, including those of the underlying mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Privacy(#[from] privacy_core::Error),
    #[error(transparent)]
    Mechanism(#[from] subsampled_gaussian::Error),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("alpha grid requires 2 <= alpha_min <= alpha_max, got [{0}, {1}]")]
    InvalidAlphaGrid(u32, u32),
    #[error("iteration horizon must be at least 1, got {0}")]
    InvalidHorizon(u64),
    #[error("iteration index must be at least 1")]
    InvalidIteration,
    #[error("the composition baseline applies only at sampling rate 1, got {0}")]
    BaselineRequiresFullSampling(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Parameters of one accounting sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccountantConfig {
    /// Probability that any given data point participates in a round.
    pub sampling_rate: f64,
    /// Noise standard deviation in units of the query sensitivity.
    pub noise_multiplier: f64,
    /// Total failure probability reported with every epsilon.
    pub delta: f64,
    /// Smallest Rényi order on the optimization grid, at least 2.
    pub alpha_min: u32,
    /// Largest Rényi order on the optimization grid.
    pub alpha_max: u32,
    /// Iteration horizon: rows are reported for t = 1..=t_max.
    pub t_max: u64,
}

impl AccountantConfig {
    pub fn validate(&self) -> Result<()> {
        SampledGmSpec::new(self.sampling_rate, self.noise_multiplier)?;
        if !self.delta.is_finite() || self.delta <= 0.0 || self.delta >= 1.0 {
            return Err(Error::InvalidDelta(self.delta));
        }
        if self.alpha_min < 2 || self.alpha_min > self.alpha_max {
            return Err(Error::InvalidAlphaGrid(self.alpha_min, self.alpha_max));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidHorizon(0));
        }
        Ok(())
    }
}

/// One horizon of a sweep: the composite epsilon after `t` rounds and the
/// order that realized it. The baseline sweep carries no order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyCurveRow {
    pub t: u64,
    pub epsilon: f64,
    pub alpha_star: Option<u32>,
}

/// Composite privacy loss over every horizon `t = 1..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyCurve {
    pub rows: Vec<PrivacyCurveRow>,
}

/// The RDP curve of a single round over the integer orders
/// `alpha_min..=alpha_max`.
pub fn per_step_curve(spec: &SampledGmSpec, alpha_min: u32, alpha_max: u32) -> Result<RdpCurve> {
    if alpha_min < 2 || alpha_min > alpha_max {
        return Err(Error::InvalidAlphaGrid(alpha_min, alpha_max));
    }
    RdpCurve::try_from_grid(alpha_min, alpha_max, |alpha| {
        subsampled_gaussian::rdp(spec, alpha).map_err(Error::from)
    })
}

/// Composite `(epsilon, alpha_star)` after `t` rounds of the mechanism whose
/// single-round curve is given: the minimum over the grid of
/// `t·ε(α) + ln(1/delta)/(α−1)`, ties broken toward the smallest order.
pub fn epsilon_at(curve: &RdpCurve, t: u64, delta: f64) -> Result<(f64, u32)> {
    if t == 0 {
        return Err(Error::InvalidIteration);
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidDelta(delta));
    }
    let ln_inv_delta = (1.0 / delta).ln();
    let tf = t as f64;
    let mut best_eps = f64::INFINITY;
    let mut best_alpha = 0u32;
    for point in curve.points() {
        let candidate = tf * point.epsilon() + ln_inv_delta / (point.alpha() - 1.0);
        if candidate < best_eps {
            best_eps = candidate;
            best_alpha = point.alpha() as u32;
        }
    }
    Ok((best_eps, best_alpha))
}

/// Composite epsilon at every horizon `t = 1..=t_max` via the RDP route.
/// The single-round curve is computed once; composition scales it.
pub fn sweep(config: &AccountantConfig) -> Result<PrivacyCurve> {
    config.validate()?;
    let spec = SampledGmSpec::new(config.sampling_rate, config.noise_multiplier)?;
    let per_step = per_step_curve(&spec, config.alpha_min, config.alpha_max)?;
    let mut rows = Vec::with_capacity(config.t_max as usize);
    for t in 1..=config.t_max {
        let (epsilon, alpha_star) = epsilon_at(&per_step, t, config.delta)?;
        rows.push(PrivacyCurveRow {
            t,
            epsilon,
            alpha_star: Some(alpha_star),
        });
    }
    Ok(PrivacyCurve { rows })
}

/// Baseline sweep through the advanced composition theorem, defined for the
/// unsampled mechanism only. The total delta is split per horizon as
/// `delta/(2t)` for each of the `t` steps plus `delta/2` of slack.
pub fn act_sweep(config: &AccountantConfig) -> Result<PrivacyCurve> {
    config.validate()?;
    if config.sampling_rate != 1.0 {
        return Err(Error::BaselineRequiresFullSampling(config.sampling_rate));
    }
    let spec = GaussianMechanismSpec::new(1.0, config.noise_multiplier)?;
    let mut rows = Vec::with_capacity(config.t_max as usize);
    for t in 1..=config.t_max {
        let delta_step = config.delta / (2.0 * t as f64);
        let eps_step = gm_dp_epsilon(&spec, delta_step)?;
        let budget = advanced_composition(eps_step, delta_step, t, config.delta / 2.0)?;
        rows.push(PrivacyCurveRow {
            t,
            epsilon: budget.epsilon(),
            alpha_star: None,
        });
    }
    Ok(PrivacyCurve { rows })
}
