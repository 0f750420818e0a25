//! Deterministic seed derivation.
//!
//! Every random decision in the crate flows from a single `u64` run seed.
//! Sub-streams (per stage, per task, per episode) are derived by hashing the
//! parent seed with a label, so adding a consumer never perturbs the streams
//! of existing ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes a seed with a label into a child seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &b in label.as_bytes() {
        h = h.wrapping_add(b as u64);
        h = splitmix(h);
    }
    splitmix(h)
}

/// Child seed indexed by an integer (episode counters, tree ids).
pub fn derive_seed_indexed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix(derive_seed(seed, label).wrapping_add(splitmix(index)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The crate-wide RNG: small, fast, seedable, portable.
pub type Rng = ChaCha8Rng;

/// RNG for a labelled sub-stream.
pub fn stream(seed: u64, label: &str) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, label))
}

/// RNG for an indexed sub-stream.
pub fn stream_indexed(seed: u64, label: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed_indexed(seed, label, index))
}
