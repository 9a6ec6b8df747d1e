//! Seed derivation for independent random streams.
//!
//! Every random draw in the crate comes from a generator seeded by
//! [`stream`], keyed by the master seed plus a path of integers (fold,
//! start vertex, walk index, ...). Work items never share a generator, so
//! the outcome does not depend on how rayon schedules them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

// Domain tags keep streams for different purposes apart.
pub(crate) const TAG_SPLIT: u64 = 0x5350_4c49;
pub(crate) const TAG_NEGATIVE: u64 = 0x4e45_4741;
pub(crate) const TAG_WALK: u64 = 0x5741_4c4b;
pub(crate) const TAG_AUC: u64 = 0x4155_4300;
pub(crate) const TAG_RANDOM_SCORE: u64 = 0x5253_434f;
pub(crate) const TAG_DELETE: u64 = 0x4445_4c45;
pub(crate) const TAG_BASELINE: u64 = 0x4241_5345;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `seed` with `path` into a single 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Generator for the stream identified by `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
