//! Seeded substreams. Every random draw in the crate comes from a ChaCha8
//! stream selected by `(seed, purpose, index)`, so results never depend on
//! evaluation order or thread count.

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;

pub(crate) const STREAM_STARTS: u64 = 1;
pub(crate) const STREAM_TRIALS: u64 = 2;
pub(crate) const STREAM_ORACLE: u64 = 3;
pub(crate) const STREAM_TENSOR: u64 = 4;

pub(crate) fn substream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 48) ^ index);
    rng
}

/// Uniform in `[0, 1)` with 53 random bits.
pub(crate) fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    let u = 1.0 - uniform(rng);
    let v = uniform(rng);
    math::sqrt(-2.0 * math::ln(u)) * math::cos(2.0 * core::f64::consts::PI * v)
}

pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| gaussian(rng)).collect()
}

/// Uniform point on the unit sphere of `R^dim`.
pub(crate) fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vec(rng, dim);
        if math::normalize(&mut v) {
            return v;
        }
    }
}
