//! Monte Carlo plumbing: configuration, seeded substreams and running means.
//!
//! Substream rule: task `i` of a computation seeded with `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with its stream id set to `i`. Work is
//! cut into fixed-size chunks (or one task per path for SDE ensembles) and
//! reduced in task order, so results do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Monte Carlo / SDE controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    /// Number of independent draws or sample paths.
    pub paths: usize,
    /// SDE time step.
    pub dt: f64,
    /// SDE horizon.
    pub horizon: f64,
}

impl McConfig {
    pub fn new(seed: u64, paths: usize) -> Self {
        Self {
            seed,
            paths,
            dt: 1e-3,
            horizon: 10.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(invalid("Monte Carlo path count must be positive"));
        }
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(invalid("dt and horizon must be positive"));
        }
        Ok(())
    }
}

/// Deterministic substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            se: 0.0,
            n: 0,
        }
    }

    /// Number of standard errors separating `self` from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.se == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.se
        }
    }

    /// Joint standard error of the difference of two independent estimates.
    pub fn joint_se(&self, other: &Estimate) -> f64 {
        self.se.hypot(other.se)
    }
}

/// Welford running mean/variance, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        *self = Self { n, mean, m2 };
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        };
        Estimate {
            mean: self.mean,
            se,
            n: self.n,
        }
    }
}

/// A fixed-width bank of accumulators.
#[derive(Debug, Clone, Default)]
pub struct AccumulatorBank(pub Vec<Accumulator>);

impl AccumulatorBank {
    pub fn new(width: usize) -> Self {
        Self(vec![Accumulator::default(); width])
    }

    pub fn push(&mut self, xs: &[f64]) {
        for (a, x) in self.0.iter_mut().zip(xs) {
            a.push(*x);
        }
    }

    pub fn merge(&mut self, other: &AccumulatorBank) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.merge(b);
        }
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        self.0.iter().map(Accumulator::estimate).collect()
    }
}

/// Draws per chunk for i.i.d. Monte Carlo loops.
pub const CHUNK: usize = 8192;

/// Runs `n` i.i.d. draws split into [`CHUNK`]-sized tasks, each on its own
/// substream, pushing `width` statistics per draw. Reduction is in task order.
pub fn run_iid<F>(seed: u64, n: usize, width: usize, draw: F) -> AccumulatorBank
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let tasks = n.div_ceil(CHUNK);
    let partials: Vec<AccumulatorBank> = (0..tasks)
        .into_par_iter()
        .map(|t| {
            let count = CHUNK.min(n - t * CHUNK);
            let mut rng = substream(seed, t as u64);
            let mut bank = AccumulatorBank::new(width);
            let mut buf = vec![0.0; width];
            for _ in 0..count {
                draw(&mut rng, &mut buf);
                bank.push(&buf);
            }
            bank
        })
        .collect();
    let mut total = AccumulatorBank::new(width);
    for p in &partials {
        total.merge(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn accumulator_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut acc = Accumulator::default();
        xs.iter().for_each(|&x| acc.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((acc.mean() - mean).abs() < 1e-12);
        assert!((acc.variance() - var).abs() < 1e-10);

        let (left, right) = xs.split_at(333);
        let mut a = Accumulator::default();
        let mut b = Accumulator::default();
        left.iter().for_each(|&x| a.push(x));
        right.iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - mean).abs() < 1e-12);
        assert!((a.variance() - var).abs() < 1e-10);
    }

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        let a: u64 = substream(7, 0).random();
        let b: u64 = substream(7, 1).random();
        let c: u64 = substream(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn run_iid_is_thread_count_independent() {
        let f = |rng: &mut ChaCha8Rng, out: &mut [f64]| out[0] = rng.random::<f64>();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_iid(3, 50_000, 1, f));
        let many = run_iid(3, 50_000, 1, f);
        assert_eq!(one.0[0].mean().to_bits(), many.0[0].mean().to_bits());
        assert!((one.0[0].mean() - 0.5).abs() < 0.01);
    }
}
