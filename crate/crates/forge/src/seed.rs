//! Per-sample seeds.
//!
//! `sample_seed(master, i) = splitmix64(master + 0x9E3779B97F4A7C15 * (i + 1))`
//! with wrapping arithmetic. The finalizer is a bijection, so distinct
//! indices under one master seed never collide, and any index can be
//! generated without touching the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sample_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

pub fn sample_id(seed: u64) -> String {
    format!("syn-{seed:016x}")
}

/// Stream 0 drives every sampled decision; stream 1 feeds pixel noise, so
/// the plan of a sample never depends on its image size.
pub fn plan_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}
