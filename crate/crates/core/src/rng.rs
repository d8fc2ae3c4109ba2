//! Seed plumbing. Every random draw in a run descends from one 64-bit seed;
//! independent consumers get their own ChaCha stream keyed by a tag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags for the independent consumers of a run seed.
pub mod stream {
    pub const MSB_ARRAY: u64 = 0x4d53_4200;
    pub const LSB_ARRAY_1: u64 = 0x4c53_4201;
    pub const LSB_ARRAY_2: u64 = 0x4c53_4202;
    pub const CONVERSION_NOISE: u64 = 0x4e4f_4953;
    pub const CALIBRATION: u64 = 0x4341_4c00;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const WAVEFORM: u64 = 0x5741_5645;
}

/// SplitMix64 finaliser applied to `seed ^ tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_rng(seed: u64, tag: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}
