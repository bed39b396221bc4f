use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// All protocol parameters of one simulated deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of devices.
    pub n_devices: usize,
    /// Probability that a device participates in a given round.
    pub participation_prob: f64,
    /// Probability that a local sample joins a participant's batch.
    pub batch_prob: f64,
    /// Bound on the L2 norm of every per-sample gradient.
    pub clip_norm: f64,
    /// Standard deviation of the privacy noise each participant generates,
    /// before the 1/sqrt(a) sharing factor.
    pub device_noise_std: f64,
    /// Per-coordinate variance of the additive noise at the receiver.
    pub channel_noise_var: f64,
    /// Step size of the server's model update.
    pub learning_rate: f64,
    /// Number of training rounds.
    pub rounds: u64,
    /// Pilot manipulation factor: devices observe this multiple of their
    /// true channel gain and invert what they observe.
    pub csi_factor: f64,
    /// Root seed; every random stream in a run derives from it.
    pub seed: u64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_devices == 0 {
            return Err(Error::NoDevices);
        }
        if !self.participation_prob.is_finite()
            || self.participation_prob <= 0.0
            || self.participation_prob > 1.0
        {
            return Err(Error::InvalidParticipationProb(self.participation_prob));
        }
        if !self.batch_prob.is_finite() || self.batch_prob <= 0.0 || self.batch_prob > 1.0 {
            return Err(Error::InvalidBatchProb(self.batch_prob));
        }
        if !self.clip_norm.is_finite() || self.clip_norm <= 0.0 {
            return Err(Error::InvalidClipNorm(self.clip_norm));
        }
        if !self.device_noise_std.is_finite() || self.device_noise_std < 0.0 {
            return Err(Error::InvalidDeviceNoiseStd(self.device_noise_std));
        }
        if !self.channel_noise_var.is_finite() || self.channel_noise_var < 0.0 {
            return Err(Error::InvalidChannelNoiseVar(self.channel_noise_var));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidLearningRate(self.learning_rate));
        }
        if self.rounds == 0 {
            return Err(Error::NoRounds);
        }
        if !self.csi_factor.is_finite() || self.csi_factor <= 0.0 || self.csi_factor > 1.0 {
            return Err(Error::InvalidCsiFactor(self.csi_factor));
        }
        Ok(())
    }

    /// Probability that any given data point enters a round.
    pub fn sampling_rate(&self) -> f64 {
        self.participation_prob * self.batch_prob
    }
}
