use rand_distr::{Distribution, Normal};

use crate::round::RoundDraw;
use crate::stream::{stream, StreamPurpose};
use crate::task::{DataPoint, LearningTask};
use crate::{Error, Result, SystemConfig};

/// One device: its local dataset and the true channel gain it currently
/// sees.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    device_id: usize,
    dataset: Vec<DataPoint>,
    channel_gain: f64,
}

impl DeviceState {
    /// Requires a nonempty dataset and a finite positive channel gain.
    pub fn new(device_id: usize, dataset: Vec<DataPoint>, channel_gain: f64) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset(device_id));
        }
        if !channel_gain.is_finite() || channel_gain <= 0.0 {
            return Err(Error::InvalidChannelGain(channel_gain));
        }
        Ok(Self {
            device_id,
            dataset,
            channel_gain,
        })
    }

    pub fn device_id(&self) -> usize {
        self.device_id
    }

    pub fn dataset(&self) -> &[DataPoint] {
        &self.dataset
    }

    pub fn channel_gain(&self) -> f64 {
        self.channel_gain
    }

    pub fn set_channel_gain(&mut self, gain: f64) -> Result<()> {
        if !gain.is_finite() || gain <= 0.0 {
            return Err(Error::InvalidChannelGain(gain));
        }
        self.channel_gain = gain;
        Ok(())
    }
}

/// The server's model: a weight vector and the number of completed rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    weights: Vec<f64>,
    round: u64,
}

impl ModelState {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights, round: 0 }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn round(&self) -> u64 {
        self.round
    }
}

/// What one participant transmits, split into the data-bearing term and the
/// privacy-noise term. Both already carry the channel inversion; the
/// physical transmission is their sum. The parts stay separate so tests can
/// take the received superposition apart.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSignal {
    gradient_part: Vec<f64>,
    noise_part: Vec<f64>,
}

impl DeviceSignal {
    pub fn gradient_part(&self) -> &[f64] {
        &self.gradient_part
    }

    pub fn noise_part(&self) -> &[f64] {
        &self.noise_part
    }

    /// The vector actually put on the air.
    pub fn transmitted(&self) -> Vec<f64> {
        self.gradient_part
            .iter()
            .zip(&self.noise_part)
            .map(|(g, n)| g + n)
            .collect()
    }
}

/// What the server receives: the gain-weighted superposition of all
/// transmissions plus channel noise. `value` is assembled as the exact sum
/// of the three recorded components.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    value: Vec<f64>,
    signal_part: Vec<f64>,
    device_noise_part: Vec<f64>,
    channel_noise_part: Vec<f64>,
}

impl ReceivedSignal {
    pub fn value(&self) -> &[f64] {
        &self.value
    }

    /// The data-bearing component: the batch-mean clipped gradient, scaled
    /// by 1/k when the server manipulated the pilots.
    pub fn signal_part(&self) -> &[f64] {
        &self.signal_part
    }

    /// Superposed privacy noise from all participants, equally scaled.
    pub fn device_noise_part(&self) -> &[f64] {
        &self.device_noise_part
    }

    /// The receiver's own additive noise.
    pub fn channel_noise_part(&self) -> &[f64] {
        &self.channel_noise_part
    }
}

/// Rescales a gradient so its L2 norm never exceeds `clip_norm`; gradients
/// already within the bound pass through unchanged.
pub fn clip_gradient(gradient: Vec<f64>, clip_norm: f64) -> Vec<f64> {
    debug_assert!(clip_norm > 0.0);
    let norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm <= clip_norm {
        return gradient;
    }
    let scale = clip_norm / norm;
    gradient.into_iter().map(|g| g * scale).collect()
}

/// Builds one participant's transmission for the round.
///
/// The gradient term sums the device's clipped per-sample batch gradients
/// and divides by the round's total batch size, so the superposition over
/// all participants is the batch-mean gradient regardless of who held which
/// sample. The noise term scales a fresh Gaussian by 1/sqrt(a(t)), so the
/// total injected noise variance is the same whether one device transmits
/// or a hundred. Both terms divide by the channel gain as the device
/// observes it, which is `csi_factor` times the true gain.
///
/// In a round that sampled no data at all, participants send pure noise;
/// the received power then looks no different from an ordinary round.
pub fn device_signal(
    draw: &RoundDraw,
    device: &DeviceState,
    model: &ModelState,
    config: &SystemConfig,
    task: &dyn LearningTask,
) -> Result<DeviceSignal> {
    let batch = draw
        .batch(device.device_id())
        .ok_or(Error::NotAParticipant(device.device_id()))?;
    let dim = model.weights().len();
    let h = 1.0 / (config.csi_factor * device.channel_gain());

    let mut gradient_part = vec![0.0; dim];
    if draw.batch_total() > 0 {
        let mut sum = vec![0.0; dim];
        for &index in batch {
            let point = device.dataset().get(index).ok_or(Error::SampleOutOfRange {
                device: device.device_id(),
                index,
            })?;
            let gradient = clip_gradient(task.gradient(model.weights(), point), config.clip_norm);
            if gradient.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: gradient.len(),
                });
            }
            for (acc, g) in sum.iter_mut().zip(&gradient) {
                *acc += g;
            }
        }
        let b = draw.batch_total() as f64;
        for (out, s) in gradient_part.iter_mut().zip(&sum) {
            *out = h * (s / b);
        }
    }

    let beta = 1.0 / (draw.active_count() as f64).sqrt();
    let noise = Normal::new(0.0, config.device_noise_std)
        .map_err(|_| Error::InvalidDeviceNoiseStd(config.device_noise_std))?;
    let mut rng = stream(
        config.seed,
        StreamPurpose::DeviceNoise,
        draw.round(),
        device.device_id() as u64,
    );
    let noise_part = (0..dim)
        .map(|_| h * (beta * noise.sample(&mut rng)))
        .collect();

    Ok(DeviceSignal {
        gradient_part,
        noise_part,
    })
}

/// The superposition the server observes: the gain-weighted sum of all
/// transmissions plus fresh channel noise. With no participants the result
/// is channel noise alone.
pub fn aggregate(
    signals: &[DeviceSignal],
    channel_gains: &[f64],
    config: &SystemConfig,
    round: u64,
    dim: usize,
) -> Result<ReceivedSignal> {
    if signals.len() != channel_gains.len() {
        return Err(Error::SignalGainMismatch {
            signals: signals.len(),
            gains: channel_gains.len(),
        });
    }
    let mut signal_part = vec![0.0; dim];
    let mut device_noise_part = vec![0.0; dim];
    for (signal, &gain) in signals.iter().zip(channel_gains) {
        if signal.gradient_part.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: signal.gradient_part.len(),
            });
        }
        for j in 0..dim {
            signal_part[j] += gain * signal.gradient_part[j];
            device_noise_part[j] += gain * signal.noise_part[j];
        }
    }

    let noise = Normal::new(0.0, config.channel_noise_var.sqrt())
        .map_err(|_| Error::InvalidChannelNoiseVar(config.channel_noise_var))?;
    let mut rng = stream(config.seed, StreamPurpose::ChannelNoise, round, 0);
    let channel_noise_part: Vec<f64> = (0..dim).map(|_| noise.sample(&mut rng)).collect();

    let value = (0..dim)
        .map(|j| signal_part[j] + device_noise_part[j] + channel_noise_part[j])
        .collect();
    Ok(ReceivedSignal {
        value,
        signal_part,
        device_noise_part,
        channel_noise_part,
    })
}

/// The server's gradient step: weights decrease by `eta` times the received
/// value and the round counter advances.
pub fn ps_update(model: &ModelState, received: &ReceivedSignal, eta: f64) -> Result<ModelState> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::InvalidLearningRate(eta));
    }
    if received.value.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            got: received.value.len(),
        });
    }
    let weights = model
        .weights
        .iter()
        .zip(&received.value)
        .map(|(w, y)| w - eta * y)
        .collect();
    Ok(ModelState {
        weights,
        round: model.round + 1,
    })
}

/// Worst-case L2 change of the round's aggregate from one sample entering
/// or leaving: a clipped gradient moves the `b`-sample average by at most
/// `2 clip_norm / b`.
pub fn sensitivity(clip_norm: f64, batch_total: usize) -> Result<f64> {
    if !clip_norm.is_finite() || clip_norm <= 0.0 {
        return Err(Error::InvalidClipNorm(clip_norm));
    }
    if batch_total == 0 {
        return Err(Error::ZeroBatch);
    }
    Ok(2.0 * clip_norm / batch_total as f64)
}
