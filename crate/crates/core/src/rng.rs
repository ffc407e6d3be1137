//! Seeded counter-style random streams.
//!
//! Each stream is a SplitMix64 generator: a 64-bit counter advanced by a
//! fixed odd increment and passed through an avalanche mix. Independent
//! streams are derived from `(seed, stream_index)`, so parallel workers never
//! share state and every draw is reproducible from its index.

use num_complex::Complex64;
use std::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Stream {
    seed: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Stream `index` of the family rooted at `seed`.
    pub fn derive(seed: u64, index: u64) -> Self {
        let base = mix64(seed ^ mix64(index.wrapping_add(GOLDEN_GAMMA)));
        Stream { seed: base, counter: 0 }
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in (0, 1].
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard complex normal: real and imaginary parts independent N(0, 1/2).
    ///
    /// Box–Muller with radius `sqrt(-ln u1)`, so `|g|^2` is exactly Exp(1).
    pub fn cnormal(&mut self) -> Complex64 {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        let r = (-u1.ln()).sqrt();
        let theta = TAU * u2;
        Complex64::new(r * theta.cos(), r * theta.sin())
    }

    pub fn cnormal_vec(&mut self, dim: usize) -> Vec<Complex64> {
        (0..dim).map(|_| self.cnormal()).collect()
    }

    /// Real standard normal N(0, 1).
    pub fn normal(&mut self) -> f64 {
        self.cnormal().re * std::f64::consts::SQRT_2
    }
}
