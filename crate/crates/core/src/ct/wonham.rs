//! Telegraph sample paths, the Wonham filter and the Yao smoother.
//!
//! Indexing on a grid `t_k = k dt`, `k = 0..=n`:
//! `x[k] = X(t_{k+1})`, `dy[k] = Y(t_{k+1}) - Y(t_k)`. Filter outputs are
//! aligned with `x`: `forward[k]` uses `dy[0..=k]`, `backward[k]` uses
//! `dy[k+1..n]`, so `backward[n-1] = 0`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::telegraph::TelegraphModel;
use crate::error::{invalid, Error, Result};
use crate::mc::{substream, Accumulator, Estimate, McConfig};

/// Clamp applied to the filter state.
pub const CLAMP: f64 = 1.0 - 1e-12;

/// Input values and observation increments on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub dt: f64,
    pub x: Vec<f64>,
    pub dy: Vec<f64>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Time stamps `t_{k+1}` aligned with `x`.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.x.len()).map(|k| k as f64 * self.dt).collect()
    }
}

/// Largest stable Euler–Maruyama step, `0.01 / max(ν, snr)`.
pub fn max_stable_dt(m: &TelegraphModel) -> f64 {
    0.01 / m.nu.max(m.snr)
}

fn check_dt(m: &TelegraphModel, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(invalid("dt must be > 0"));
    }
    let max = max_stable_dt(m);
    if dt > max {
        return Err(Error::StepTooLarge { dt, max });
    }
    Ok(())
}

fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(invalid("horizon and dt must be > 0"));
    }
    let n = (horizon / dt).round();
    if n < 2.0 {
        return Err(invalid("horizon must span at least two steps"));
    }
    Ok(n as usize)
}

/// Simulates `n` steps with `rng`: stationary ±1 start, exponential
/// holding times, and `dy = sqrt(snr) ∫ X dt + sqrt(dt) Z` exactly.
pub fn simulate_telegraph_with<R: Rng + ?Sized>(m: &TelegraphModel, n: usize, dt: f64, rng: &mut R) -> SamplePath {
    let hold = Exp::new(m.nu).expect("positive rate");
    let root = m.snr.sqrt();
    let sd = dt.sqrt();
    let mut state = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut next_flip: f64 = hold.sample(rng);
    let mut x = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for k in 0..n {
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        let mut integral = 0.0;
        let mut t = t0;
        while next_flip < t1 {
            integral += state * (next_flip - t);
            t = next_flip;
            state = -state;
            next_flip += hold.sample(rng);
        }
        integral += state * (t1 - t);
        let z: f64 = StandardNormal.sample(rng);
        x.push(state);
        dy.push(root * integral + sd * z);
    }
    SamplePath { dt, x, dy }
}

/// A telegraph path on `[0, horizon]` drawn from substream 0 of `seed`.
pub fn simulate_telegraph(m: &TelegraphModel, horizon: f64, dt: f64, seed: u64) -> Result<SamplePath> {
    let n = steps_for(horizon, dt)?;
    Ok(simulate_telegraph_with(m, n, dt, &mut substream(seed, 0)))
}

/// One Euler–Maruyama step of
/// `dX̂ = -[2νX̂ + snr X̂(1-X̂²)] dt + sqrt(snr) (1-X̂²) dY`.
#[inline]
fn wonham_step(xhat: f64, dy: f64, two_nu: f64, snr: f64, root: f64, dt: f64) -> f64 {
    let g = 1.0 - xhat * xhat;
    let next = xhat - (two_nu * xhat + snr * xhat * g) * dt + root * g * dy;
    next.clamp(-CLAMP, CLAMP)
}

fn run_filter<I: Iterator<Item = f64>>(m: &TelegraphModel, dt: f64, increments: I, out: &mut Vec<f64>) {
    let (two_nu, root) = (2.0 * m.nu, m.snr.sqrt());
    let mut xhat = 0.0;
    for dy in increments {
        xhat = wonham_step(xhat, dy, two_nu, m.snr, root, dt);
        out.push(xhat);
    }
}

/// Causal conditional means `E[X(t_{k+1}) | dy[0..=k]]`, starting at 0.
pub fn wonham_filter(path: &SamplePath, m: &TelegraphModel) -> Result<Vec<f64>> {
    check_dt(m, path.dt)?;
    let mut out = Vec::with_capacity(path.dy.len());
    run_filter(m, path.dt, path.dy.iter().copied(), &mut out);
    Ok(out)
}

/// Anticausal conditional means `E[X(t_{k+1}) | dy[k+1..n]]`: the same filter
/// run on the time-reversed increments.
pub fn wonham_backward(path: &SamplePath, m: &TelegraphModel) -> Result<Vec<f64>> {
    check_dt(m, path.dt)?;
    let n = path.dy.len();
    let mut rev = Vec::with_capacity(n);
    rev.push(0.0);
    run_filter(m, path.dt, path.dy[1..].iter().rev().copied(), &mut rev);
    rev.reverse();
    Ok(rev)
}

/// `(a + b) / (1 + a b)`.
#[inline]
pub fn yao_combine(forward: f64, backward: f64) -> f64 {
    (forward + backward) / (1.0 + forward * backward)
}

/// Smoothed conditional means from forward and backward filter outputs.
pub fn yao_smoother(forward: &[f64], backward: &[f64]) -> Result<Vec<f64>> {
    if forward.len() != backward.len() {
        return Err(Error::DimensionMismatch(format!(
            "forward has {} samples, backward {}",
            forward.len(),
            backward.len()
        )));
    }
    Ok(forward.iter().zip(backward).map(|(&f, &b)| yao_combine(f, b)).collect())
}

/// Ensemble squared errors of the three estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WonhamEnsemble {
    /// Causal error at the horizon.
    pub causal: Estimate,
    /// Smoothed error at the midpoint.
    pub smoothed: Estimate,
    /// Anticausal error at the midpoint.
    pub anticausal: Estimate,
    pub paths: usize,
    pub steps: usize,
}

/// Squared errors `(causal at T, smoothed at T/2, anticausal at T/2)` for
/// one path drawn from `rng`.
fn path_errors(m: &TelegraphModel, n: usize, dt: f64, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let path = simulate_telegraph_with(m, n, dt, rng);
    let mut fwd = Vec::with_capacity(n);
    run_filter(m, dt, path.dy.iter().copied(), &mut fwd);
    // Backward filter only needs to reach the midpoint.
    let mid = n / 2 - 1;
    let (two_nu, root) = (2.0 * m.nu, m.snr.sqrt());
    let mut b = 0.0;
    for k in (mid + 1..n).rev() {
        b = wonham_step(b, path.dy[k], two_nu, m.snr, root, dt);
    }
    let x_mid = path.x[mid];
    [
        (path.x[n - 1] - fwd[n - 1]).powi(2),
        (x_mid - yao_combine(fwd[mid], b)).powi(2),
        (x_mid - b).powi(2),
    ]
}

/// Monte Carlo ensemble over `mc.paths` independent paths of length
/// `mc.horizon`; path `i` uses substream `i` of `mc.seed`.
///
/// The horizon plays the role of burn-in for the causal error; the midpoint
/// sits `T/2` away from either end for the smoothed and anticausal errors.
pub fn wonham_ensemble(m: &TelegraphModel, mc: &McConfig) -> Result<WonhamEnsemble> {
    mc.check()?;
    check_dt(m, mc.dt)?;
    let n = steps_for(mc.horizon, mc.dt)?;
    let errors: Vec<[f64; 3]> = (0..mc.paths)
        .into_par_iter()
        .map(|i| path_errors(m, n, mc.dt, &mut substream(mc.seed, i as u64)))
        .collect();
    let mut acc = [Accumulator::default(); 3];
    for e in &errors {
        for (a, v) in acc.iter_mut().zip(e) {
            a.push(*v);
        }
    }
    Ok(WonhamEnsemble {
        causal: acc[0].estimate(),
        smoothed: acc[1].estimate(),
        anticausal: acc[2].estimate(),
        paths: mc.paths,
        steps: n,
    })
}

/// A path with its causal and smoothed estimates, for dumping.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredPath {
    pub path: SamplePath,
    pub causal: Vec<f64>,
    pub smoothed: Vec<f64>,
}

/// Simulates one path from substream `index` of `seed` and runs both filters.
pub fn filtered_path(m: &TelegraphModel, horizon: f64, dt: f64, seed: u64, index: u64) -> Result<FilteredPath> {
    check_dt(m, dt)?;
    let n = steps_for(horizon, dt)?;
    let path = simulate_telegraph_with(m, n, dt, &mut substream(seed, index));
    let causal = wonham_filter(&path, m)?;
    let backward = wonham_backward(&path, m)?;
    let smoothed = yao_smoother(&causal, &backward)?;
    Ok(FilteredPath { path, causal, smoothed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_shapes_and_values() {
        let m = TelegraphModel::new(1.0, 2.0).unwrap();
        let p = simulate_telegraph(&m, 1.0, 1e-3, 3).unwrap();
        assert_eq!(p.len(), 1000);
        assert_eq!(p.dy.len(), 1000);
        assert!(p.x.iter().all(|v| *v == 1.0 || *v == -1.0));
        assert_eq!(p, simulate_telegraph(&m, 1.0, 1e-3, 3).unwrap());
    }

    #[test]
    fn flip_rate_matches_nu() {
        let m = TelegraphModel::new(2.0, 0.0).unwrap();
        let p = simulate_telegraph(&m, 2000.0, 1e-3, 5).unwrap();
        let flips = p.x.windows(2).filter(|w| w[0] != w[1]).count() as f64;
        // Poisson count with mean 4000 (multiple flips per step are negligible).
        assert!((flips - 4000.0).abs() < 5.0 * 4000f64.sqrt(), "{flips}");
    }

    #[test]
    fn zero_snr_filter_relaxes() {
        let m = TelegraphModel::new(1.0, 0.0).unwrap();
        let p = simulate_telegraph(&m, 1.0, 1e-3, 1).unwrap();
        let f = wonham_filter(&p, &m).unwrap();
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn step_precondition() {
        let m = TelegraphModel::new(1.0, 10.0).unwrap();
        let p = SamplePath {
            dt: 0.01,
            x: vec![1.0; 10],
            dy: vec![0.0; 10],
        };
        assert!(matches!(wonham_filter(&p, &m), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn filter_stays_inside_interval() {
        let m = TelegraphModel::new(1.0, 10.0).unwrap();
        let p = simulate_telegraph(&m, 20.0, 1e-3, 2).unwrap();
        let f = wonham_filter(&p, &m).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1.0));
        let b = wonham_backward(&p, &m).unwrap();
        assert_eq!(b[b.len() - 1], 0.0);
        assert!(b.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn yao_properties() {
        assert_eq!(yao_smoother(&[0.3, -0.7], &[0.0, 0.0]).unwrap(), vec![0.3, -0.7]);
        for (a, b) in [(0.2, 0.5), (-0.9, 0.4)] {
            assert_eq!(yao_combine(a, b), yao_combine(b, a));
        }
        assert!(yao_smoother(&[0.1], &[]).is_err());
    }

    #[test]
    fn ensemble_is_reproducible_across_thread_counts() {
        let m = TelegraphModel::new(1.0, 3.0).unwrap();
        let mc = McConfig::new(11, 64).with_horizon(2.0);
        let many = wonham_ensemble(&m, &mc).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| wonham_ensemble(&m, &mc).unwrap());
        assert_eq!(many, one);
    }

    #[test]
    fn smoothing_beats_filtering_empirically() {
        let m = TelegraphModel::new(1.0, 3.0).unwrap();
        let e = wonham_ensemble(&m, &McConfig::new(4, 4000).with_horizon(6.0)).unwrap();
        assert!(e.smoothed.mean < e.causal.mean);
        assert!((e.anticausal.mean - e.causal.mean).abs() < 3.0 * e.anticausal.joint_se(&e.causal));
    }
}
