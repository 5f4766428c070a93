//! Deterministic sub-seed derivation.
//!
//! Every batched operation (sample generation, per-instance Monte-Carlo
//! evaluation) derives one RNG per work item from the master seed, the item
//! index, and a purpose salt. Results therefore do not depend on execution
//! order, which is what makes parallel and sequential runs byte-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose salts keeping independent random streams from colliding.
pub mod salt {
    pub const COUNTS: u64 = 0x01;
    pub const TEXTURE: u64 = 0x02;
    pub const PLACEMENT: u64 = 0x03;
    pub const TRAIN: u64 = 0x04;
    pub const PET_METRIC: u64 = 0x10;
    pub const ROT_INPUT: u64 = 0x20;
    pub const ROT_EXPLAINER: u64 = 0x21;
    pub const ROT_PREDICTOR: u64 = 0x22;
    pub const ROT_METRIC: u64 = 0x23;
}

/// SplitMix64 mixing step; the standard finalizer from Steele et al.,
/// also used by `SeedableRng::seed_from_u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed from (master seed, item index, purpose salt).
pub fn subseed(master: u64, index: u64, salt: u64) -> u64 {
    splitmix64(master ^ splitmix64(index ^ splitmix64(salt)))
}

/// RNG for one work item: ChaCha seeded from the derived sub-seed.
pub fn item_rng(master: u64, index: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(subseed(master, index, salt))
}
