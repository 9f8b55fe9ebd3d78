//! Seed fan-out for reproducible parallel work.
//!
//! Every task gets its own generator seeded from `(master_seed, index)`, so the
//! bytes a task produces never depend on which worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type DetRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed and a task index into an independent 64-bit seed.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(0xD2B7_4407_B1CE_6E93))
}

pub fn rng_from_seed(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for task `index` under `master_seed`.
pub fn stream_rng(master_seed: u64, index: u64) -> DetRng {
    rng_from_seed(derive_seed(master_seed, index))
}
