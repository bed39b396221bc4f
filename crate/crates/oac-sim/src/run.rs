use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use accountant::{epsilon_at, per_step_curve};
use privacy_core::{compose_rdp_sum, RdpCurve};
use subsampled_gaussian::SampledGmSpec;

use crate::round::draw_round;
use crate::signal::{aggregate, device_signal, ps_update, sensitivity, DeviceState, ModelState};
use crate::stream::{stream, StreamPurpose};
use crate::task::{mean_loss, LearningTask};
use crate::{Error, Result, SystemConfig};

/// How the run prices its privacy loss.
///
/// Nominal mode charges every round at one configured noise multiplier, so
/// the reported curve matches an accountant sweep with the same parameters.
/// Realized mode derives each round's multiplier from the batch size that
/// actually occurred and composes the resulting heterogeneous curves;
/// rounds that sampled no data cost nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountingMode {
    Nominal,
    Realized,
}

/// Privacy-accounting parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountingOptions {
    pub mode: AccountingMode,
    /// Sensitivity-normalized noise multiplier. Required in nominal mode,
    /// forbidden in realized mode where it is derived per round.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_multiplier: Option<f64>,
    pub delta: f64,
    pub alpha_min: u32,
    pub alpha_max: u32,
}

impl AccountingOptions {
    pub fn validate(&self) -> Result<()> {
        match (self.mode, self.noise_multiplier) {
            (AccountingMode::Nominal, None) => return Err(Error::MissingNoiseMultiplier),
            (AccountingMode::Nominal, Some(nm)) => {
                if !nm.is_finite() || nm <= 0.0 {
                    return Err(Error::InvalidNoiseMultiplier(nm));
                }
            }
            (AccountingMode::Realized, Some(_)) => return Err(Error::UnexpectedNoiseMultiplier),
            (AccountingMode::Realized, None) => {}
        }
        if !self.delta.is_finite() || self.delta <= 0.0 || self.delta >= 1.0 {
            return Err(accountant::Error::InvalidDelta(self.delta).into());
        }
        if self.alpha_min < 2 || self.alpha_min > self.alpha_max {
            return Err(accountant::Error::InvalidAlphaGrid(self.alpha_min, self.alpha_max).into());
        }
        Ok(())
    }
}

/// Distribution of the true channel gains, redrawn per device per round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelGainModel {
    Constant { gain: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl Default for ChannelGainModel {
    fn default() -> Self {
        Self::Constant { gain: 1.0 }
    }
}

impl ChannelGainModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { gain } => {
                if !gain.is_finite() || gain <= 0.0 {
                    return Err(Error::InvalidGainParameter(gain));
                }
            }
            Self::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidGainParameter(mu));
                }
                if !sigma.is_finite() || sigma < 0.0 {
                    return Err(Error::InvalidGainParameter(sigma));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Self::Constant { gain } => gain,
            Self::LogNormal { mu, sigma } => LogNormal::new(mu, sigma)
                .expect("validated parameters")
                .sample(rng),
        }
    }
}

/// One completed round: training progress plus the privacy budget spent so
/// far and the round's participation counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub round: u64,
    pub loss: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub active_devices: usize,
    pub batch_total: usize,
}

/// A full training run: the loss before any update and one row per round.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial_loss: f64,
    pub rows: Vec<TrajectoryRow>,
}

/// Executes the full protocol: per round, draw participation and batches,
/// redraw channel gains, collect every participant's transmission,
/// aggregate over the air, step the model, and account the privacy spent.
///
/// The result is a deterministic function of the configuration, the device
/// datasets, and the gain model; device order does not matter.
pub fn run(
    config: &SystemConfig,
    task: &dyn LearningTask,
    devices: &mut [DeviceState],
    accounting: &AccountingOptions,
    gain_model: &ChannelGainModel,
) -> Result<Trajectory> {
    config.validate()?;
    accounting.validate()?;
    gain_model.validate()?;
    if devices.len() != config.n_devices {
        return Err(Error::DeviceCountMismatch {
            expected: config.n_devices,
            got: devices.len(),
        });
    }
    devices.sort_by_key(DeviceState::device_id);
    let mut index_of = HashMap::with_capacity(devices.len());
    for (index, device) in devices.iter().enumerate() {
        if index_of.insert(device.device_id(), index).is_some() {
            return Err(Error::DuplicateDeviceId(device.device_id()));
        }
        for point in device.dataset() {
            if point.features.len() != task.dim() {
                return Err(Error::DimensionMismatch {
                    expected: task.dim(),
                    got: point.features.len(),
                });
            }
        }
    }

    let nominal_curve = match accounting.mode {
        AccountingMode::Nominal => {
            let spec = SampledGmSpec::new(
                config.sampling_rate(),
                accounting.noise_multiplier.expect("validated above"),
            )?;
            Some(per_step_curve(
                &spec,
                accounting.alpha_min,
                accounting.alpha_max,
            )?)
        }
        AccountingMode::Realized => None,
    };

    let mut model = ModelState::new(vec![0.0; task.dim()]);
    let initial_loss = mean_loss(task, model.weights(), devices);
    let mut rows = Vec::with_capacity(config.rounds as usize);
    let mut realized: Option<RdpCurve> = None;
    let mut epsilon = 0.0;

    for round in 1..=config.rounds {
        for device in devices.iter_mut() {
            let mut rng = stream(
                config.seed,
                StreamPurpose::ChannelGain,
                round,
                device.device_id() as u64,
            );
            device.set_channel_gain(gain_model.draw(&mut rng))?;
        }

        let draw = draw_round(config, devices, round);

        let mut signals = Vec::with_capacity(draw.active_count());
        let mut gains = Vec::with_capacity(draw.active_count());
        for &id in draw.participants() {
            let device = &devices[index_of[&id]];
            signals.push(device_signal(&draw, device, &model, config, task)?);
            gains.push(device.channel_gain());
        }
        let received = aggregate(&signals, &gains, config, round, task.dim())?;
        model = ps_update(&model, &received, config.learning_rate)?;

        match accounting.mode {
            AccountingMode::Nominal => {
                let curve = nominal_curve.as_ref().expect("built above");
                epsilon = epsilon_at(curve, round, accounting.delta)?.0;
            }
            AccountingMode::Realized => {
                if draw.batch_total() > 0 {
                    let step_noise = config.device_noise_std
                        / sensitivity(config.clip_norm, draw.batch_total())?;
                    let spec = SampledGmSpec::new(config.sampling_rate(), step_noise)?;
                    let curve = per_step_curve(&spec, accounting.alpha_min, accounting.alpha_max)?;
                    realized = Some(match realized {
                        None => curve,
                        Some(total) => compose_rdp_sum(&total, &curve)?,
                    });
                    epsilon =
                        epsilon_at(realized.as_ref().expect("just set"), 1, accounting.delta)?.0;
                }
            }
        }

        rows.push(TrajectoryRow {
            round,
            loss: mean_loss(task, model.weights(), devices),
            epsilon,
            delta: accounting.delta,
            active_devices: draw.active_count(),
            batch_total: draw.batch_total(),
        });
    }

    Ok(Trajectory { initial_loss, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{synthetic_regression_data, LinearRegression};

    fn build_devices(dim: usize, n: usize, samples: usize, seed: u64) -> Vec<DeviceState> {
        let (_, datasets) = synthetic_regression_data(dim, n, samples, 0.1, seed).unwrap();
        datasets
            .into_iter()
            .enumerate()
            .map(|(id, data)| DeviceState::new(id, data, 1.0).unwrap())
            .collect()
    }

    fn small_config() -> SystemConfig {
        SystemConfig {
            n_devices: 3,
            participation_prob: 0.8,
            batch_prob: 0.5,
            clip_norm: 1.0,
            device_noise_std: 2.0,
            channel_noise_var: 0.1,
            learning_rate: 0.05,
            rounds: 6,
            csi_factor: 1.0,
            seed: 11,
        }
    }

    fn nominal_options() -> AccountingOptions {
        AccountingOptions {
            mode: AccountingMode::Nominal,
            noise_multiplier: Some(2.0),
            delta: 1e-5,
            alpha_min: 2,
            alpha_max: 32,
        }
    }

    #[test]
    fn options_enforce_the_mode_multiplier_pairing() {
        let mut opts = nominal_options();
        opts.noise_multiplier = None;
        assert_eq!(opts.validate(), Err(Error::MissingNoiseMultiplier));

        let mut opts = nominal_options();
        opts.mode = AccountingMode::Realized;
        assert_eq!(opts.validate(), Err(Error::UnexpectedNoiseMultiplier));
        opts.noise_multiplier = None;
        assert!(opts.validate().is_ok());

        let mut opts = nominal_options();
        opts.noise_multiplier = Some(0.0);
        assert_eq!(opts.validate(), Err(Error::InvalidNoiseMultiplier(0.0)));
        let mut opts = nominal_options();
        opts.delta = 1.0;
        assert!(opts.validate().is_err());
        let mut opts = nominal_options();
        opts.alpha_min = 1;
        assert!(opts.validate().is_err());
    }

    #[test]
    fn gain_models_validate_and_draw_positive_gains() {
        assert!(ChannelGainModel::Constant { gain: 0.0 }.validate().is_err());
        assert!(ChannelGainModel::LogNormal {
            mu: 0.0,
            sigma: -1.0
        }
        .validate()
        .is_err());
        assert_eq!(
            ChannelGainModel::default(),
            ChannelGainModel::Constant { gain: 1.0 }
        );

        let model = ChannelGainModel::LogNormal {
            mu: 0.0,
            sigma: 0.5,
        };
        let mut rng = stream(3, StreamPurpose::ChannelGain, 1, 0);
        for _ in 0..100 {
            assert!(model.draw(&mut rng) > 0.0);
        }
    }

    #[test]
    fn runs_are_reproducible_and_count_rounds() {
        let config = small_config();
        let task = LinearRegression::new(2);
        let mut devices = build_devices(2, 3, 8, 1);
        let mut devices_again = build_devices(2, 3, 8, 1);
        let opts = nominal_options();
        let gains = ChannelGainModel::default();

        let a = run(&config, &task, &mut devices, &opts, &gains).unwrap();
        let b = run(&config, &task, &mut devices_again, &opts, &gains).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 6);
        assert_eq!(a.rows.last().unwrap().round, 6);
        assert!(a.rows.iter().all(|r| r.delta == 1e-5));
        for pair in a.rows.windows(2) {
            assert!(pair[1].epsilon > pair[0].epsilon);
        }
    }

    #[test]
    fn nominal_epsilon_matches_the_accountant_sweep() {
        let config = small_config();
        let task = LinearRegression::new(2);
        let mut devices = build_devices(2, 3, 8, 1);
        let opts = nominal_options();
        let trajectory = run(&config, &task, &mut devices, &opts, &Default::default()).unwrap();

        let sweep = accountant::sweep(&accountant::AccountantConfig {
            sampling_rate: config.sampling_rate(),
            noise_multiplier: 2.0,
            delta: 1e-5,
            alpha_min: 2,
            alpha_max: 32,
            t_max: config.rounds,
        })
        .unwrap();
        for (row, swept) in trajectory.rows.iter().zip(&sweep.rows) {
            assert_eq!(row.epsilon, swept.epsilon);
        }
    }

    #[test]
    fn realized_accounting_spends_nothing_on_empty_rounds() {
        let mut config = small_config();
        config.participation_prob = 0.05;
        config.batch_prob = 0.05;
        config.rounds = 40;
        let task = LinearRegression::new(2);
        let mut devices = build_devices(2, 3, 8, 1);
        let opts = AccountingOptions {
            mode: AccountingMode::Realized,
            noise_multiplier: None,
            delta: 1e-5,
            alpha_min: 2,
            alpha_max: 32,
        };
        let trajectory = run(&config, &task, &mut devices, &opts, &Default::default()).unwrap();

        let mut previous = 0.0;
        let mut saw_empty_after_start = false;
        for row in &trajectory.rows {
            if row.batch_total == 0 {
                assert_eq!(row.epsilon, previous);
                saw_empty_after_start = true;
            } else {
                assert!(row.epsilon > previous);
            }
            previous = row.epsilon;
        }
        assert!(saw_empty_after_start);
        assert!(trajectory.rows.iter().any(|r| r.batch_total > 0));
    }

    #[test]
    fn device_count_and_ids_are_checked() {
        let config = small_config();
        let task = LinearRegression::new(2);
        let opts = nominal_options();

        let mut too_few = build_devices(2, 2, 8, 1);
        assert_eq!(
            run(&config, &task, &mut too_few, &opts, &Default::default()),
            Err(Error::DeviceCountMismatch {
                expected: 3,
                got: 2
            })
        );

        let mut devices = build_devices(2, 3, 8, 1);
        let clone = devices[0].clone();
        devices[2] = clone;
        assert_eq!(
            run(&config, &task, &mut devices, &opts, &Default::default()),
            Err(Error::DuplicateDeviceId(0))
        );
    }
}
