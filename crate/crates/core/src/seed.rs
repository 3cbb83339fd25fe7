//! Counter-based randomness.
//!
//! Every random quantity in a run is addressed by `(master seed, stream, counter)`.
//! The same address always yields the same draws, independent of the order in
//! which other quantities were realized. This is what lets counterfactual replays
//! see the exact loss functions of the main run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named random streams. Values are arbitrary but frozen: changing them changes
/// every realized experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    BestArm = 0x5a_0001,
    Walk = 0x5a_0002,
    Learner = 0x5a_0003,
    IidLoss = 0x5a_0004,
    MemoryProbe = 0x5a_0005,
    Exploration = 0x5a_0006,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of an ordered pair; used for per-run seeds `hash(seed_base, run_index)`.
pub fn combine(a: u64, b: u64) -> u64 {
    mix64(mix64(a) ^ b.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// A uniform draw in `[0, 1)` addressed by `(seed, stream, counter)`.
pub fn unit_f64(seed: u64, stream: Stream, counter: u64) -> f64 {
    let bits = combine(combine(seed, stream as u64), counter);
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A family of independent ChaCha8 keystreams, one per counter value.
#[derive(Debug, Clone)]
pub struct CounterRng {
    base: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(combine(seed, stream as u64)),
        }
    }

    /// Generator for one counter value, positioned at the start of its keystream.
    pub fn at(&self, counter: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(counter);
        rng.set_word_pos(0);
        rng
    }
}

/// A sequential generator for a whole stream, e.g. a learner's internal coin flips.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    CounterRng::new(seed, stream).at(0)
}
