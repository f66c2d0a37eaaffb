//! Per-trial random streams.
//!
//! Every trial owns two independent ChaCha8 streams keyed by
//! `(master_seed, sweep_index, trial_index)`: stream 0 carries the walk
//! increments `V`, stream 1 the observation noise `W`. ChaCha is a counter
//! mode cipher, so a trial's draws depend only on its key and never on which
//! worker runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const INCREMENT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Identifies one trial inside one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub sweep_index: u64,
    pub trial_index: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, sweep_index: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            sweep_index,
            trial_index,
        }
    }

    fn seed(&self) -> [u8; 32] {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.sweep_index.to_le_bytes());
        seed[16..24].copy_from_slice(&self.trial_index.to_le_bytes());
        seed
    }
}

/// The increment and noise streams of a single trial.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    increments: ChaCha8Rng,
    noise: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(key: StreamKey) -> Self {
        let seed = key.seed();
        let mut increments = ChaCha8Rng::from_seed(seed);
        increments.set_stream(INCREMENT_STREAM);
        let mut noise = ChaCha8Rng::from_seed(seed);
        noise.set_stream(NOISE_STREAM);
        Self { increments, noise }
    }

    pub fn for_trial(master_seed: u64, sweep_index: u64, trial_index: u64) -> Self {
        Self::new(StreamKey::new(master_seed, sweep_index, trial_index))
    }

    /// Next standard-normal walk increment `V_t`.
    #[inline]
    pub fn increment(&mut self) -> f64 {
        self.increments.sample(StandardNormal)
    }

    /// Next standard-normal observation noise `W_t`.
    #[inline]
    pub fn noise(&mut self) -> f64 {
        self.noise.sample(StandardNormal)
    }
}
