//! Counter-style random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose key is the
//! tuple `(seed, trial, user, purpose)`, so results do not depend on which
//! worker ran which trial or in what order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; keeps e.g. channel draws and validation draws
/// of the same trial independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Channels = 1,
    Errors = 2,
    Validation = 3,
    Randomization = 4,
    Probe = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub trial: u64,
    pub user: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(seed: u64, trial: u64, user: u64, purpose: Purpose) -> Self {
        Self { seed, trial, user, purpose }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trial.to_le_bytes());
        key[16..24].copy_from_slice(&self.user.to_le_bytes());
        key[24..].copy_from_slice(&(self.purpose as u64).to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

pub fn stream(seed: u64, trial: u64, user: u64, purpose: Purpose) -> ChaCha8Rng {
    StreamKey::new(seed, trial, user, purpose).rng()
}
