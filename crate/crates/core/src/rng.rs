//! Counter-keyed random streams.
//!
//! Every random decision in a run draws from a stream keyed by
//! `(run_seed, generation, index, purpose)`. Streams never depend on the
//! order in which they are created, so lives can be evaluated on any number
//! of workers and still give bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    FoodScatter = 0,
    Spawn = 1,
    Reproduction = 2,
    Init = 3,
}

/// SplitMix64 finalizer applied after the golden-ratio increment.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the four key words into one 64-bit stream seed.
pub fn mix(run_seed: u64, generation: u64, index: u64, purpose: Purpose) -> u64 {
    let mut h = splitmix64(run_seed);
    h = splitmix64(h ^ generation);
    h = splitmix64(h ^ index);
    splitmix64(h ^ purpose as u64)
}

pub fn stream(run_seed: u64, generation: u64, index: u64, purpose: Purpose) -> StreamRng {
    StreamRng::seed_from_u64(mix(run_seed, generation, index, purpose))
}

pub fn seeded(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
