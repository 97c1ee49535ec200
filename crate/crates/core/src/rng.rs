use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

/// Seed plus sub-stream index for a reproducible random source.
///
/// The same `(seed, stream)` pair always yields the same sample sequence.
/// Monte Carlo trial `t` of stream `s` runs on stream `(s << 32) | t`, so a
/// trial's samples do not depend on which worker executes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Sub-stream for trial `t`. Only the low 32 bits of `stream` and `t` are
    /// distinguishable.
    pub fn trial(self, t: u64) -> Self {
        debug_assert!(t <= u32::MAX as u64, "trial index exceeds 32 bits");
        Self { seed: self.seed, stream: (self.stream << 32) | (t & 0xffff_ffff) }
    }

    pub fn rng(self) -> SimRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream);
        SimRng { inner }
    }
}

/// Counter-based generator with the handful of draws the simulator needs.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

impl SimRng {
    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_low(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * INV_2_53
    }

    /// Circularly-symmetric complex Gaussian with unit variance: real and
    /// imaginary parts are independent N(0, 1/2).
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut self.inner);
        let im: f64 = StandardNormal.sample(&mut self.inner);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }

    /// Equiprobable ±1.
    pub fn bpsk(&mut self) -> f64 {
        if self.inner.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
