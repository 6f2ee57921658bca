//! Stable seed derivation and the per-run random generator.
//!
//! Every run draws from a [`ChaCha8Rng`] seeded with
//! `derive(master, phase, config_index, run_index)`. The derivation is a
//! SplitMix64 chain: starting from `state = splitmix64(master)`, each of the three
//! words `w` is absorbed as `state = splitmix64(state ^ splitmix64(w + K))`
//! where `K` is a per-position odd constant. External tools can reproduce
//! any single run from the four integers alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

/// Phase tag reserved for validation runs.
pub const VALIDATION_PHASE: u64 = u64::MAX;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, phase: u64, config_index: u64, run_index: u64) -> u64 {
    const SALTS: [u64; 3] = [
        0xA076_1D64_78BD_642F,
        0xE703_7ED1_A0B4_28DB,
        0x8EBC_6AF0_9C88_C6E3,
    ];
    let mut state = splitmix64(master);
    for (word, salt) in [phase, config_index, run_index].into_iter().zip(SALTS) {
        state = splitmix64(state ^ splitmix64(word.wrapping_add(salt)));
    }
    state
}

pub fn rng_from_seed(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}
