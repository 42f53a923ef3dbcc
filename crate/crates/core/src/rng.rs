//! Counter-based random streams.
//!
//! Every replica owns a ChaCha8 key derived from `(seed, replica)`, and every
//! period of a path draws from its own 64-bit ChaCha stream. A period's
//! randomness is therefore fixed by its coordinates alone, independent of
//! how many numbers earlier periods consumed or of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Which consumer inside a period a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Period durations drawn by the regime policy.
    Policy = 0,
    /// Jump epochs and sizes of the down (subordinator) input.
    Down = 1,
    /// Jump epochs and sizes of the up netput.
    Up = 2,
    /// Gaussian increments for grid-mode Brownian motion.
    Gauss = 3,
}

/// Root of all streams belonging to one replica of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub replica: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replica: u64) -> Self {
        Self { seed, replica }
    }

    /// Stream for `channel` within period `period` (period 0 is the lead-in
    /// before the first down period, used by up-only schedules).
    pub fn stream(&self, period: u64, channel: Channel) -> StreamRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replica.to_le_bytes());
        key[16..24].copy_from_slice(b"updown\x00\x01");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(period.wrapping_mul(4).wrapping_add(channel as u64));
        rng
    }
}
