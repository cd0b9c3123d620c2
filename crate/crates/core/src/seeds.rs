//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded from a `u64`.
//! Experiments start from one base seed and expand it into named sub-seeds
//! (`"bank"`, `"train"`, `"val"`, `"test"`, `"means"`, `"trial"`, ...) with
//! [`derive`]. The derivation is:
//!
//! ```text
//! derive(base, label, index) = splitmix64(splitmix64(base ^ fnv1a64(label)) ^ splitmix64(index))
//! ```
//!
//! so streams for different labels or indices are independent of one another
//! and of the order in which they are requested.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The PRNG family used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive(base: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ fnv1a64(label)) ^ splitmix64(index))
}

/// Shorthand for `rng(derive(base, label, index))`.
pub fn stream(base: u64, label: &str, index: u64) -> Rng {
    rng(derive(base, label, index))
}

fn fnv1a64(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
