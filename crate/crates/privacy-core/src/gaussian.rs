use crate::{Error, GaussianMechanismSpec, Result};

/// `(epsilon, delta)`-DP of the Gaussian mechanism:
/// `epsilon = sqrt(2 ln(1.25/delta)) * sensitivity / noise_std`.
pub fn gm_dp_epsilon(spec: &GaussianMechanismSpec, delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidDelta(delta));
    }
    Ok((2.0 * (1.25 / delta).ln()).sqrt() * spec.sensitivity() / spec.noise_std())
}

/// RDP of the Gaussian mechanism at order `alpha`:
/// `epsilon = alpha * sensitivity^2 / (2 noise_std^2)`.
pub fn gm_rdp_epsilon(spec: &GaussianMechanismSpec, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let ratio = spec.sensitivity() / spec.noise_std();
    Ok(alpha * ratio * ratio / 2.0)
}
