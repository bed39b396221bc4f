use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// What a random draw is for. Every purpose gets its own stream so that no
/// draw can shift any other purpose's sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    /// Whether each device joins a round.
    Participation,
    /// Which local samples a participant batches.
    Batching,
    /// A participant's privacy noise.
    DeviceNoise,
    /// The receiver's additive noise.
    ChannelNoise,
    /// Per-round channel gains.
    ChannelGain,
    /// Synthetic dataset generation.
    Data,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Participation => 1,
            StreamPurpose::Batching => 2,
            StreamPurpose::DeviceNoise => 3,
            StreamPurpose::ChannelNoise => 4,
            StreamPurpose::ChannelGain => 5,
            StreamPurpose::Data => 6,
        }
    }
}

/// An independent random stream for one (purpose, round, device) coordinate
/// under a root seed. The coordinate is the cipher key, so streams are
/// reproducible in isolation and independent of the order in which other
/// streams are consumed.
pub fn stream(seed: u64, purpose: StreamPurpose, round: u64, device: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
    key[16..24].copy_from_slice(&round.to_le_bytes());
    key[24..32].copy_from_slice(&device.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}
