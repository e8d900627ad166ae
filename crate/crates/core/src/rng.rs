//! Reproducible random streams.
//!
//! Every simulation draws from ChaCha20 keyed by the run seed, one stream per
//! trial (or restart). The construction is fixed so other implementations can
//! regenerate the same numbers:
//!
//! * key: the 64-bit seed in little-endian order in bytes 0..8, bytes 8..32 zero
//! * stream id: the trial index; word position starts at 0
//! * `u64` draws: consecutive 64-bit little-endian words of the keystream
//! * uniform on [0,1): `(u >> 11) * 2^-53`
//! * standard normal: Box–Muller on two uniforms, `sqrt(-2 ln(1-u1)) cos(2π u2)`

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Stream(ChaCha20Rng);

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream);
        Stream(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index drawn with the given (normalized) weights.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Uniform point on the probability simplex of dimension `n`.
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }
}
