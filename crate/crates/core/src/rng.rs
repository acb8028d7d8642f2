//! Seeded random streams.
//!
//! Each stream is a ChaCha8 generator keyed by the master seed, with the
//! 64-bit ChaCha stream id carrying `(trial index, role)`. Streams for
//! distinct trials or roles never overlap, and a trial's draws do not depend
//! on which other trials ran or in which order.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// What a stream is used for inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamRole {
    /// Source symbols and sensor noise.
    Data = 1,
    /// Scattering geometry and phases of the desired signal.
    Scattering = 2,
    /// Per-snapshot incoherent scattering gains.
    IncoherentGains = 3,
    /// Initial steering guess inside the presumed sector.
    InitialGuess = 4,
    /// Free stream for tests and demos.
    Auxiliary = 15,
}

const ROLE_BITS: u32 = 8;

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, trial: u64, role: StreamRole) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream((trial << ROLE_BITS) | role as u64);
        Self { rng }
    }

    /// A stream for ad-hoc use (tests, demos) keyed only by a seed.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0, StreamRole::Auxiliary)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circular complex Gaussian with `E|z|² = variance`, split equally
    /// between real and imaginary parts.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let s = variance.sqrt() * FRAC_1_SQRT_2;
        Complex64::new(s * self.standard_normal(), s * self.standard_normal())
    }

    /// Uniform phase on `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        self.uniform(0.0, 2.0 * PI)
    }
}
