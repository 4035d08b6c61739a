//! Deterministic, splittable pseudo-random streams.
//!
//! Each [`RngStream`] is identified by a `(master_seed, stream_index)` pair
//! and produces an independent sequence, so simulation replications can be
//! dealt out to threads in any order while remaining bit-reproducible. The
//! generator is a SplitMix-style counter design: a per-stream Weyl increment
//! (odd, derived from the stream index) advances a 64-bit state that is then
//! scrambled by a strong finalizer.

use crate::numerics::fmath;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stafford "Mix13" variant of the 64-bit finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Murmur3-style finalizer used to derive per-stream increments.
fn mix_gamma(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^= z >> 33;
    z | 1 // increments must be odd
}

/// A deterministic random stream addressed by `(master_seed, stream_index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
    gamma: u64,
    cached_gaussian: Option<f64>,
}

impl RngStream {
    /// Create the stream `stream_index` of the family seeded by
    /// `master_seed`. Distinct indices give statistically independent
    /// sequences; the same pair always gives the same sequence.
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let base = mix64(master_seed.wrapping_mul(GOLDEN_GAMMA).wrapping_add(GOLDEN_GAMMA));
        let state = mix64(base ^ mix64(stream_index.wrapping_mul(0xA24B_AED4_963E_E407)));
        let gamma = mix_gamma(base.wrapping_add(stream_index.wrapping_mul(GOLDEN_GAMMA)));
        RngStream { state, gamma, cached_gaussian: None }
    }

    /// Next raw 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53-bit resolution.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box–Muller; the paired value is cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        // u1 ∈ (0, 1] so the logarithm is finite.
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        let r = fmath::sqrt(-2.0 * fmath::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.cached_gaussian = Some(r * fmath::sin(theta));
        r * fmath::cos(theta)
    }
}
