use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use oac_sim::{AccountingOptions, ChannelGainModel, SystemConfig};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// The declarative run description. Which blocks must be present depends
/// on the command; unknown keys anywhere are rejected before any
/// computation starts, since a silently ignored privacy parameter is
/// worse than a failed run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accountant: Option<AccountantBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accounting: Option<AccountingOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_gains: Option<ChannelGainModel>,
}

/// Parameters of an accounting sweep, mirroring the accountant's config.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountantBlock {
    pub sampling_rate: f64,
    pub noise_multiplier: f64,
    pub delta: f64,
    pub alpha_min: u32,
    pub alpha_max: u32,
    pub t_max: u64,
}

impl AccountantBlock {
    pub fn to_config(self, sampling_rate: f64) -> accountant::AccountantConfig {
        accountant::AccountantConfig {
            sampling_rate,
            noise_multiplier: self.noise_multiplier,
            delta: self.delta,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            t_max: self.t_max,
        }
    }
}

/// The synthetic linear-regression problem the simulation trains on.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskBlock {
    pub dim: usize,
    pub samples_per_device: usize,
    pub observation_noise_std: f64,
}

impl TaskBlock {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(CliError::Config("task dimension must be at least 1".into()));
        }
        if self.samples_per_device == 0 {
            return Err(CliError::Config(
                "samples_per_device must be at least 1".into(),
            ));
        }
        if !self.observation_noise_std.is_finite() || self.observation_noise_std < 0.0 {
            return Err(CliError::Config(format!(
                "observation_noise_std must be finite and nonnegative, got {}",
                self.observation_noise_std
            )));
        }
        Ok(())
    }
}

pub fn load(path: &Path) -> Result<RunConfigFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|error| CliError::Config(format!("cannot read {}: {error}", path.display())))?;
    let file: RunConfigFile = serde_json::from_str(&text)
        .map_err(|error| CliError::Config(format!("{}: {error}", path.display())))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {}; this build reads version {}",
            file.schema_version, SCHEMA_VERSION
        )));
    }
    Ok(file)
}
