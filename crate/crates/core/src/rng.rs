//! Reproducible random streams keyed by `(seed, stream)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMat, CVec, C64};

/// A ChaCha8 generator whose output depends only on the master seed and the
/// stream index, so parallel sweeps draw identical samples regardless of
/// scheduling.
#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent child stream, e.g. one per restart.
    pub fn fork(&mut self, tag: u64) -> StreamRng {
        let child_seed = self.inner.next_u64() ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        StreamRng::new(child_seed, tag)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Standard complex Gaussian `(x + iy)/√2`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(self.normal() * s, self.normal() * s)
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    pub fn gaussian_vector(&mut self, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| self.complex_normal())
    }

    /// Probability vector drawn uniformly from the simplex.
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (0..n).map(|_| -self.uniform().max(1e-300).ln()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    }
}
