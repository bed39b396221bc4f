use std::collections::BTreeMap;

use rand::Rng;

use crate::signal::DeviceState;
use crate::stream::{stream, StreamPurpose};
use crate::{Error, Result, SystemConfig};

/// One round's realized participation: which devices transmit and which of
/// their local samples joined the shared batch. The participant count and
/// batch total are derived from the stored sets, so they cannot disagree
/// with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundDraw {
    round: u64,
    participants: Vec<usize>,
    batches: BTreeMap<usize, Vec<usize>>,
}

impl RoundDraw {
    /// Builds a draw from explicit parts. Participants must be strictly
    /// increasing device ids; batches may only name participants and must
    /// hold strictly increasing sample indices.
    pub fn from_parts(
        round: u64,
        participants: Vec<usize>,
        batches: BTreeMap<usize, Vec<usize>>,
    ) -> Result<Self> {
        if participants.windows(2).any(|pair| pair[1] <= pair[0]) {
            return Err(Error::UnsortedParticipants);
        }
        for (&device, samples) in &batches {
            if participants.binary_search(&device).is_err() {
                return Err(Error::BatchWithoutParticipant(device));
            }
            if samples.windows(2).any(|pair| pair[1] <= pair[0]) {
                return Err(Error::UnsortedBatch(device));
            }
        }
        Ok(Self {
            round,
            participants,
            batches,
        })
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Participating device ids, strictly increasing.
    pub fn participants(&self) -> &[usize] {
        &self.participants
    }

    pub fn is_participant(&self, device: usize) -> bool {
        self.participants.binary_search(&device).is_ok()
    }

    /// The sample indices device `device` batched, if it participates.
    /// Participants with an empty batch still transmit their noise term.
    pub fn batch(&self, device: usize) -> Option<&[usize]> {
        if !self.is_participant(device) {
            return None;
        }
        Some(
            self.batches
                .get(&device)
                .map(|samples| samples.as_slice())
                .unwrap_or(&[]),
        )
    }

    /// Number of participating devices, a(t).
    pub fn active_count(&self) -> usize {
        self.participants.len()
    }

    /// Total number of sampled data points across participants, b_t.
    pub fn batch_total(&self) -> usize {
        self.batches.values().map(Vec::len).sum()
    }
}

/// Samples a round: every device joins independently with probability p and
/// each local sample of a participant joins the batch independently with
/// probability q. Every decision reads its own stream, so one device's
/// outcome never depends on another's, nor on the order devices are listed.
pub fn draw_round(config: &SystemConfig, devices: &[DeviceState], round: u64) -> RoundDraw {
    let mut participants = Vec::new();
    let mut batches = BTreeMap::new();
    for device in devices {
        let id = device.device_id();
        let mut participation = stream(config.seed, StreamPurpose::Participation, round, id as u64);
        if !participation.gen_bool(config.participation_prob) {
            continue;
        }
        participants.push(id);
        let mut batching = stream(config.seed, StreamPurpose::Batching, round, id as u64);
        let samples: Vec<usize> = (0..device.dataset().len())
            .filter(|_| batching.gen_bool(config.batch_prob))
            .collect();
        batches.insert(id, samples);
    }
    participants.sort_unstable();
    RoundDraw {
        round,
        participants,
        batches,
    }
}
