//! Seeded, index-addressable streams of complex Wiener increments.
//!
//! Each trajectory owns a `NoiseStream` derived from `(seed, trajectory_index)`.
//! The index selects a ChaCha8 stream id, so trajectory `i` draws the same
//! numbers no matter how many trajectories run before it or on which worker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::C64;

#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    trajectory_index: u64,
    rng: ChaCha8Rng,
    draws: u64,
    steps: u64,
    jumps: u64,
}

/// Work done on one stream: real random numbers drawn, integrator substeps
/// taken and quantum jumps performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Counters {
    pub draws: u64,
    pub steps: u64,
    pub jumps: u64,
}

impl std::ops::AddAssign for Counters {
    fn add_assign(&mut self, o: Self) {
        self.draws += o.draws;
        self.steps += o.steps;
        self.jumps += o.jumps;
    }
}

/// The stream for trajectory `trajectory_index` of an ensemble seeded with `seed`.
pub fn substream(seed: u64, trajectory_index: u64) -> NoiseStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory_index);
    NoiseStream {
        seed,
        trajectory_index,
        rng,
        draws: 0,
        steps: 0,
        jumps: 0,
    }
}

impl NoiseStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trajectory_index(&self) -> u64 {
        self.trajectory_index
    }

    /// Number of real random numbers consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn counters(&self) -> Counters {
        Counters {
            draws: self.draws,
            steps: self.steps,
            jumps: self.jumps,
        }
    }

    #[inline]
    pub(crate) fn record_step(&mut self) {
        self.steps += 1;
    }

    #[inline]
    pub(crate) fn record_jump(&mut self) {
        self.jumps += 1;
    }

    /// Draws one increment `dξ_j` per channel for a step of length `dt`.
    ///
    /// Real and imaginary parts are independent `N(0, dt/2)`, giving
    /// `E[dξ_i dξ_j*] = δ_ij dt` and `E[dξ_i dξ_j] = 0`.
    pub fn wiener_increments(&mut self, n_channels: usize, dt: f64) -> Result<Vec<C64>> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        let mut out = vec![C64::new(0.0, 0.0); n_channels];
        self.fill_wiener(wiener_scale(dt), &mut out);
        Ok(out)
    }

    /// Hot-path variant of [`wiener_increments`](Self::wiener_increments);
    /// `scale` must be `sqrt(dt/2)`.
    #[inline]
    pub(crate) fn fill_wiener(&mut self, scale: f64, out: &mut [C64]) {
        for z in out.iter_mut() {
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            *z = C64::new(scale * re, scale * im);
        }
        self.draws += 2 * out.len() as u64;
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.draws += 1;
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian with `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(s * self.standard_normal(), s * self.standard_normal())
    }
}

#[inline]
pub(crate) fn wiener_scale(dt: f64) -> f64 {
    (0.5 * dt).sqrt()
}
