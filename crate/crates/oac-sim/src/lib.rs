//! Simulation of private federated learning over a shared analog channel.
//!
//! Devices hold local data; each round a random subset transmits clipped,
//! noise-carrying gradient signals simultaneously, and the parameter server
//! observes only their gain-weighted superposition plus channel noise. Two
//! scaling rules shape the protocol: gradient terms are divided by the
//! round's total batch size so the aggregate never reveals how many devices
//! spoke, and each device's privacy noise is divided by the square root of
//! the participant count so the total injected variance stays constant even
//! when transmissions fail. The privacy cost of a run is tracked by the
//! `accountant` crate over the effective per-sample rate p·q; the channel,
//! including any pilot manipulation by the server, never enters accounting.

mod config;
mod round;
mod run;
mod signal;
mod stream;
mod task;

pub use config::SystemConfig;
pub use round::{draw_round, RoundDraw};
pub use run::{
    run, AccountingMode, AccountingOptions, ChannelGainModel, Trajectory, TrajectoryRow,
};
pub use signal::{
    aggregate, clip_gradient, device_signal, ps_update, sensitivity, DeviceSignal, DeviceState,
    ModelState, ReceivedSignal,
};
pub use stream::{stream, StreamPurpose};
pub use task::{mean_loss, synthetic_regression_data, DataPoint, LearningTask, LinearRegression};

use thiserror::Error;

/// Domain errors for simulation setup and execution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("device count must be at least 1")]
    NoDevices,
    #[error("participation probability must lie in (0, 1], got {0}")]
    InvalidParticipationProb(f64),
    #[error("batch probability must lie in (0, 1], got {0}")]
    InvalidBatchProb(f64),
    #[error("clip norm must be finite and positive, got {0}")]
    InvalidClipNorm(f64),
    #[error("device noise standard deviation must be finite and nonnegative, got {0}")]
    InvalidDeviceNoiseStd(f64),
    #[error("channel noise variance must be finite and nonnegative, got {0}")]
    InvalidChannelNoiseVar(f64),
    #[error("learning rate must be finite and positive, got {0}")]
    InvalidLearningRate(f64),
    #[error("round count must be at least 1")]
    NoRounds,
    #[error("CSI manipulation factor must lie in (0, 1], got {0}")]
    InvalidCsiFactor(f64),
    #[error("device {0} has an empty dataset")]
    EmptyDataset(usize),
    #[error("channel gain must be finite and positive, got {0}")]
    InvalidChannelGain(f64),
    #[error("device id {0} appears more than once")]
    DuplicateDeviceId(usize),
    #[error("config names {expected} devices but {got} were supplied")]
    DeviceCountMismatch { expected: usize, got: usize },
    #[error("participants must be strictly increasing device ids")]
    UnsortedParticipants,
    #[error("batch for device {0} which is not a participant")]
    BatchWithoutParticipant(usize),
    #[error("batch for device {0} must hold strictly increasing sample indices")]
    UnsortedBatch(usize),
    #[error("device {0} is not a participant of this round")]
    NotAParticipant(usize),
    #[error("device {device} has no sample {index}")]
    SampleOutOfRange { device: usize, index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{signals} signals but {gains} channel gains")]
    SignalGainMismatch { signals: usize, gains: usize },
    #[error("sensitivity requires at least one sampled point")]
    ZeroBatch,
    #[error("nominal accounting requires a noise multiplier")]
    MissingNoiseMultiplier,
    #[error("realized accounting derives its multiplier per round; do not configure one")]
    UnexpectedNoiseMultiplier,
    #[error("accounting noise multiplier must be finite and positive, got {0}")]
    InvalidNoiseMultiplier(f64),
    #[error("observation noise standard deviation must be finite and nonnegative, got {0}")]
    InvalidObservationNoiseStd(f64),
    #[error("gain model parameter must be finite (and positive where required), got {0}")]
    InvalidGainParameter(f64),
    #[error(transparent)]
    Accounting(#[from] accountant::Error),
    #[error(transparent)]
    Mechanism(#[from] subsampled_gaussian::Error),
    #[error(transparent)]
    Privacy(#[from] privacy_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
