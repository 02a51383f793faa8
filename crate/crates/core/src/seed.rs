//! Deterministic seed splitting.
//!
//! A master seed `s` yields one independent seed per stream `k` as the
//! `(k+1)`-th SplitMix64 output started from state `s`:
//! `mix(s + (k + 1) * 0x9E3779B97F4A7C15)`. Sharded samplers apply the same
//! rule with the shard index as the stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Named seed streams used by the algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedStream {
    StatePreparation = 0,
    SwapTest = 1,
    SupportSampling = 2,
    Tomography = 3,
    ReducedSwapTest = 4,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn stream_seed(master: u64, stream: SeedStream) -> u64 {
    derive_seed(master, stream as u64)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
