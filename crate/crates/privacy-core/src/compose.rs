use crate::{DpBudget, Error, RdpCurve, RdpPoint, Result};

/// Converts an RDP guarantee at order `alpha` into `(epsilon, delta)`-DP:
/// `epsilon_dp = epsilon_rdp + ln(1/delta) / (alpha - 1)`.
pub fn rdp_to_dp(point: &RdpPoint, delta: f64) -> Result<DpBudget> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidDelta(delta));
    }
    let epsilon = point.epsilon() + (1.0 / delta).ln() / (point.alpha() - 1.0);
    DpBudget::new(epsilon, delta)
}

/// Composes `steps` identical mechanisms: RDP adds pointwise, so each order's
/// epsilon is multiplied by the step count. Zero steps means no mechanism was
/// applied, which is the zero curve.
pub fn compose_rdp(curve: &RdpCurve, steps: u64) -> Result<RdpCurve> {
    if steps == 0 {
        return Ok(curve.zero_like());
    }
    let factor = steps as f64;
    let points = curve
        .points()
        .iter()
        .map(|p| RdpPoint::new(p.alpha(), p.epsilon() * factor))
        .collect::<Result<Vec<_>>>()?;
    RdpCurve::new(points)
}

/// Composes two heterogeneous mechanisms by summing their RDP curves
/// pointwise. Both curves must be defined on the same alpha grid.
pub fn compose_rdp_sum(a: &RdpCurve, b: &RdpCurve) -> Result<RdpCurve> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let points = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(pa, pb)| RdpPoint::new(pa.alpha(), pa.epsilon() + pb.epsilon()))
        .collect::<Result<Vec<_>>>()?;
    RdpCurve::new(points)
}

/// Advanced composition for `steps` adaptive `(eps_step, delta_step)`-DP
/// mechanisms with slack `delta_slack`:
/// `epsilon' = eps_step sqrt(2 steps ln(1/delta_slack))
///             + steps * eps_step (e^eps_step - 1)`,
/// `delta' = steps * delta_step + delta_slack`.
pub fn advanced_composition(
    eps_step: f64,
    delta_step: f64,
    steps: u64,
    delta_slack: f64,
) -> Result<DpBudget> {
    if !eps_step.is_finite() || eps_step < 0.0 {
        return Err(Error::InvalidEpsilon(eps_step));
    }
    if !delta_step.is_finite() || !(0.0..1.0).contains(&delta_step) {
        return Err(Error::InvalidBudgetDelta(delta_step));
    }
    if !delta_slack.is_finite() || delta_slack <= 0.0 || delta_slack >= 1.0 {
        return Err(Error::InvalidDelta(delta_slack));
    }
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    let t = steps as f64;
    let epsilon = eps_step * (2.0 * t * (1.0 / delta_slack).ln()).sqrt()
        + t * eps_step * (eps_step.exp() - 1.0);
    let delta = t * delta_step + delta_slack;
    if delta >= 1.0 {
        return Err(Error::InvalidBudgetDelta(delta));
    }
    DpBudget::new(epsilon, delta)
}
