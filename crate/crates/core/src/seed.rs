//! Deterministic seed derivation. Every random stream in the crate is a
//! `ChaCha8Rng` seeded from a 64-bit key built by [`derive`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The splitmix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `seed`, one splitmix64 round per part. Order matters.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(key: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(key)
}

/// Substream labels used by dataset generation.
pub const DESIGN_STREAM: u64 = 0x6465_7369_676e; // "design"
pub const NOISE_STREAM: u64 = 0x6e_6f69_7365; // "noise"
