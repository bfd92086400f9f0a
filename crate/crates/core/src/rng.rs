//! Seedable, splittable random streams.
//!
//! Generator: xoshiro256++ (`rand_xoshiro::Xoshiro256PlusPlus`).
//!
//! Stream splitting: the 64-bit key for `(seed, stream_id)` is
//!
//! ```text
//! key = mix64(mix64(seed) ^ (stream_id * 0x9E37_79B9_7F4A_7C15 + 0xD1B5_4A32_D192_ED03))
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer
//! (`z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31`)
//! and all arithmetic wraps. The key seeds xoshiro256++ through
//! `SeedableRng::seed_from_u64`, which expands it with SplitMix64. Uniforms
//! are `((x >> 11) + 0.5) * 2^-53`, so they lie strictly inside `(0, 1)`.
//!
//! Every step is integer arithmetic, so draws are identical on every platform.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_OFFSET: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A single-owner random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: Xoshiro256PlusPlus,
}

/// Creates the stream for `(seed, stream_id)`.
pub fn derive_stream(seed: u64, stream_id: u64) -> RngStream {
    let key = mix64(mix64(seed) ^ stream_id.wrapping_mul(GOLDEN_GAMMA).wrapping_add(STREAM_OFFSET));
    RngStream {
        seed,
        stream_id,
        inner: Xoshiro256PlusPlus::seed_from_u64(key),
    }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (((self.inner.next_u64() >> 11) as f64) + 0.5) * SCALE
    }

    /// Fills a fresh vector with `n` uniforms.
    pub fn uniforms(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
