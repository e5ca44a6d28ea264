//! Deterministic RNG streams.
//!
//! Every random decision in the toolkit draws from a `ChaCha8Rng` whose seed is
//! derived from the user seed plus a path of integer tags (class label, repeat
//! index, tree index, ...). Results therefore do not depend on the order in
//! which independent streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

// Stream tags used when deriving sub-seeds.
pub(crate) const TAG_SPLIT: u64 = 0x5350_4c49;
pub(crate) const TAG_SAMPLER: u64 = 0x534d_504c;
pub(crate) const TAG_FOREST: u64 = 0x4652_5354;
pub(crate) const TAG_TREE: u64 = 0x5452_4545;
pub(crate) const TAG_CLASS: u64 = 0x434c_5353;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `tags` into `seed`, producing an independent sub-seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}
