use crate::{Error, Result};

/// An `(epsilon, delta)` differential-privacy guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpBudget {
    epsilon: f64,
    delta: f64,
}

impl DpBudget {
    /// Requires `epsilon >= 0` and `delta` in `[0, 1)`.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        if !delta.is_finite() || !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidBudgetDelta(delta));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// A single `(alpha, epsilon)` Rényi-DP guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpPoint {
    alpha: f64,
    epsilon: f64,
}

impl RdpPoint {
    /// Requires `alpha > 1` and `epsilon >= 0`, both finite.
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 1.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self { alpha, epsilon })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// RDP guarantees of one mechanism invocation over a fixed integer alpha grid.
///
/// Orders are strictly increasing integers starting at 2 or above; the grid
/// is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RdpCurve {
    points: Vec<RdpPoint>,
}

impl RdpCurve {
    pub fn new(points: Vec<RdpPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut prev = 1.0_f64;
        for p in &points {
            if p.alpha().fract() != 0.0 || p.alpha() <= prev {
                return Err(Error::InvalidGridOrder(p.alpha()));
            }
            prev = p.alpha();
        }
        Ok(Self { points })
    }

    /// Builds a curve over the integer orders `alpha_min..=alpha_max`.
    pub fn try_from_grid<E>(
        alpha_min: u32,
        alpha_max: u32,
        mut epsilon_of: impl FnMut(u32) -> std::result::Result<f64, E>,
    ) -> std::result::Result<Self, E>
    where
        E: From<Error>,
    {
        if alpha_min < 2 || alpha_min > alpha_max {
            return Err(E::from(Error::InvalidGridOrder(alpha_min as f64)));
        }
        let mut points = Vec::with_capacity((alpha_max - alpha_min + 1) as usize);
        for alpha in alpha_min..=alpha_max {
            let eps = epsilon_of(alpha)?;
            points.push(RdpPoint::new(alpha as f64, eps).map_err(E::from)?);
        }
        Self::new(points).map_err(E::from)
    }

    pub fn points(&self) -> &[RdpPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(other.points.iter())
                .all(|(a, b)| a.alpha() == b.alpha())
    }

    /// The all-zero curve on the same grid.
    pub fn zero_like(&self) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| RdpPoint::new(p.alpha(), 0.0).expect("grid order already validated"))
            .collect();
        Self { points }
    }
}

/// A Gaussian mechanism: L2 sensitivity of the query and noise scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMechanismSpec {
    sensitivity: f64,
    noise_std: f64,
}

impl GaussianMechanismSpec {
    /// Requires both the sensitivity and the noise standard deviation to be
    /// finite and positive.
    pub fn new(sensitivity: f64, noise_std: f64) -> Result<Self> {
        if !sensitivity.is_finite() || sensitivity <= 0.0 {
            return Err(Error::InvalidSensitivity(sensitivity));
        }
        if !noise_std.is_finite() || noise_std <= 0.0 {
            return Err(Error::InvalidNoiseStd(noise_std));
        }
        Ok(Self {
            sensitivity,
            noise_std,
        })
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }
}
