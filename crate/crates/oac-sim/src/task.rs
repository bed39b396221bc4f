use rand_distr::{Distribution, Normal, StandardNormal};

use crate::stream::{stream, StreamPurpose};
use crate::{DeviceState, Error, Result};

/// One training example: a feature vector and its scalar target.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub features: Vec<f64>,
    pub target: f64,
}

/// The learning problem the federation optimizes. Implementations provide
/// per-sample loss and gradient; the simulator never needs more.
pub trait LearningTask {
    fn dim(&self) -> usize;

    fn loss(&self, weights: &[f64], point: &DataPoint) -> f64;

    fn gradient(&self, weights: &[f64], point: &DataPoint) -> Vec<f64>;
}

/// Least-squares regression with per-sample loss `(w.x - y)^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearRegression {
    dim: usize,
}

impl LinearRegression {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl LearningTask for LinearRegression {
    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, weights: &[f64], point: &DataPoint) -> f64 {
        let r = dot(weights, &point.features) - point.target;
        0.5 * r * r
    }

    fn gradient(&self, weights: &[f64], point: &DataPoint) -> Vec<f64> {
        let r = dot(weights, &point.features) - point.target;
        point.features.iter().map(|x| r * x).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Average loss over every sample held by any device.
pub fn mean_loss(task: &dyn LearningTask, weights: &[f64], devices: &[DeviceState]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for device in devices {
        for point in device.dataset() {
            total += task.loss(weights, point);
            count += 1;
        }
    }
    if count == 0 {
        return 0.0;
    }
    total / count as f64
}

/// Generates a linear-regression problem: a hidden weight vector, standard
/// normal features, and targets perturbed by observation noise. Returns the
/// hidden weights and one dataset per device. Everything is a deterministic
/// function of the seed.
pub fn synthetic_regression_data(
    dim: usize,
    n_devices: usize,
    samples_per_device: usize,
    observation_noise_std: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<DataPoint>>)> {
    if !observation_noise_std.is_finite() || observation_noise_std < 0.0 {
        return Err(Error::InvalidObservationNoiseStd(observation_noise_std));
    }
    let mut weight_rng = stream(seed, StreamPurpose::Data, 0, n_devices as u64);
    let true_weights: Vec<f64> = (0..dim)
        .map(|_| StandardNormal.sample(&mut weight_rng))
        .collect();

    let noise = Normal::new(0.0, observation_noise_std)
        .map_err(|_| Error::InvalidObservationNoiseStd(observation_noise_std))?;
    let mut datasets = Vec::with_capacity(n_devices);
    for device in 0..n_devices {
        let mut rng = stream(seed, StreamPurpose::Data, 0, device as u64);
        let mut dataset = Vec::with_capacity(samples_per_device);
        for _ in 0..samples_per_device {
            let features: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let target = dot(&true_weights, &features) + noise.sample(&mut rng);
            dataset.push(DataPoint { features, target });
        }
        datasets.push(dataset);
    }
    Ok((true_weights, datasets))
}
