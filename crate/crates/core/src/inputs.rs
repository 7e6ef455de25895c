//! Scalar input distributions, their moments, and the output-domain
//! quadrature backbone for `Y = sqrt(snr) X + N`.
//!
//! All information quantities in this crate are in nats.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::substream;
use crate::quadrature::{gauss_hermite_normal, gauss_legendre, integrate_composite, CompositeOptions};

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// One component of a Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl MixtureComponent {
    pub fn new(weight: f64, mean: f64, variance: f64) -> Self {
        Self {
            weight,
            mean,
            variance,
        }
    }
}

/// A one-dimensional input distribution `P_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputLaw {
    DiscreteAtoms { values: Vec<f64>, probs: Vec<f64> },
    Gaussian { mean: f64, variance: f64 },
    GaussianMixture { components: Vec<MixtureComponent> },
    /// Piecewise-linear density through `(grid[i], pdf[i])`, zero outside.
    GriddedDensity { grid: Vec<f64>, pdf: Vec<f64> },
}

/// Mean, variance and raw third/fourth moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub third: f64,
    pub fourth: f64,
}

impl Moments {
    /// Moments of `(X - mean) / sd`.
    pub fn standardized(&self) -> Moments {
        let m = self.mean;
        let second = self.variance + m * m;
        let c3 = self.third - 3.0 * m * second + 2.0 * m.powi(3);
        let c4 = self.fourth - 4.0 * m * self.third + 6.0 * m * m * second - 3.0 * m.powi(4);
        let sd = self.variance.sqrt();
        Moments {
            mean: 0.0,
            variance: 1.0,
            third: c3 / sd.powi(3),
            fourth: c4 / self.variance.powi(2),
        }
    }
}

/// Output-domain quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub hermite_order: usize,
    pub adaptive_tol: f64,
    /// Half-width of the output window in output standard deviations.
    pub y_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            hermite_order: 127,
            adaptive_tol: 1e-10,
            y_cutoff: 12.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hermite_order < 2 {
            return Err(Error::InvalidParameter("hermite_order must be >= 2".into()));
        }
        if !(self.adaptive_tol > 0.0) {
            return Err(Error::InvalidParameter("adaptive_tol must be > 0".into()));
        }
        if !(self.y_cutoff > 0.0) {
            return Err(Error::InvalidParameter("y_cutoff must be > 0".into()));
        }
        Ok(())
    }
}

const PROB_TOL: f64 = 1e-12;
const GRID_MASS_TOL: f64 = 1e-8;

impl InputLaw {
    pub fn atoms(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let law = InputLaw::DiscreteAtoms { values, probs };
        law.validate()?;
        Ok(law)
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        let law = InputLaw::Gaussian { mean, variance };
        law.validate()?;
        Ok(law)
    }

    pub fn mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        let law = InputLaw::GaussianMixture { components };
        law.validate()?;
        Ok(law)
    }

    pub fn gridded(grid: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        let law = InputLaw::GriddedDensity { grid, pdf };
        law.validate()?;
        Ok(law)
    }

    /// Gridded density after rescaling `pdf` to unit trapezoid mass.
    pub fn gridded_normalized(grid: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        if grid.len() != pdf.len() || grid.len() < 2 {
            return Err(Error::InvalidLaw("grid and pdf must have equal length >= 2".into()));
        }
        let mass = crate::quadrature::trapezoid(&grid, &pdf);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidLaw("gridded density has zero total mass".into()));
        }
        Self::gridded(grid, pdf.into_iter().map(|p| p / mass).collect())
    }

    /// Equiprobable `±1`.
    pub fn binary() -> Self {
        InputLaw::DiscreteAtoms {
            values: vec![-1.0, 1.0],
            probs: vec![0.5, 0.5],
        }
    }

    pub fn standard_gaussian() -> Self {
        InputLaw::Gaussian {
            mean: 0.0,
            variance: 1.0,
        }
    }

    /// Uniform density on `[a, b]` as a gridded law with `cells` cells.
    pub fn uniform_gridded(a: f64, b: f64, cells: usize) -> Result<Self> {
        if !(b > a) || cells == 0 {
            return Err(Error::InvalidLaw("uniform needs b > a and cells > 0".into()));
        }
        let grid: Vec<f64> = (0..=cells)
            .map(|i| a + (b - a) * i as f64 / cells as f64)
            .collect();
        let pdf = vec![1.0 / (b - a); cells + 1];
        Self::gridded(grid, pdf)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidLaw(m.to_string()));
        match self {
            InputLaw::DiscreteAtoms { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("atoms need equal, non-zero numbers of values and probabilities");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("atom values must be finite");
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return bad("atom probabilities must be nonnegative");
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidLaw(format!("atom probabilities sum to {s}")));
                }
            }
            InputLaw::Gaussian { mean, variance } => {
                if !mean.is_finite() || !(*variance > 0.0) || !variance.is_finite() {
                    return bad("Gaussian needs finite mean and positive variance");
                }
            }
            InputLaw::GaussianMixture { components } => {
                if components.is_empty() {
                    return bad("mixture needs at least one component");
                }
                for c in components {
                    if !(c.weight >= 0.0) || !c.mean.is_finite() || !(c.variance > 0.0) {
                        return bad("mixture components need weight >= 0, finite mean, variance > 0");
                    }
                }
                let s: f64 = components.iter().map(|c| c.weight).sum();
                if (s - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidLaw(format!("mixture weights sum to {s}")));
                }
            }
            InputLaw::GriddedDensity { grid, pdf } => {
                if grid.len() != pdf.len() || grid.len() < 2 {
                    return bad("grid and pdf must have equal length >= 2");
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("grid must be strictly increasing");
                }
                if pdf.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return bad("pdf values must be finite and nonnegative");
                }
                let mass = crate::quadrature::trapezoid(grid, pdf);
                if mass == 0.0 {
                    return bad("gridded density has zero total mass");
                }
                if (mass - 1.0).abs() > GRID_MASS_TOL {
                    return Err(Error::InvalidLaw(format!("gridded density integrates to {mass}")));
                }
            }
        }
        Ok(())
    }

    /// Whether the law has a Lebesgue density.
    pub fn has_density(&self) -> bool {
        !matches!(self, InputLaw::DiscreteAtoms { .. })
    }

    /// Exact moments (piecewise-linear exact for gridded densities).
    pub fn moments(&self) -> Moments {
        let raw = |k: i32| -> f64 { self.raw_moment(k) };
        let mean = raw(1);
        let second = raw(2);
        Moments {
            mean,
            variance: (second - mean * mean).max(0.0),
            third: raw(3),
            fourth: raw(4),
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        self.moments().variance
    }

    fn raw_moment(&self, k: i32) -> f64 {
        match self {
            InputLaw::DiscreteAtoms { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(v, p)| p * v.powi(k))
                .sum(),
            InputLaw::Gaussian { mean, variance } => normal_raw_moment(*mean, *variance, k as usize),
            InputLaw::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * normal_raw_moment(c.mean, c.variance, k as usize))
                .sum(),
            InputLaw::GriddedDensity { .. } => {
                let (xs, ws) = self.gridded_nodes(4);
                xs.iter().zip(&ws).map(|(x, w)| w * x.powi(k)).sum()
            }
        }
    }

    /// Gauss–Legendre nodes per cell with weights `pdf(x) * w`; exact for
    /// polynomial moments up to degree `2 * per_cell - 2`.
    fn gridded_nodes(&self, per_cell: usize) -> (Vec<f64>, Vec<f64>) {
        let InputLaw::GriddedDensity { grid, pdf } = self else {
            return (Vec::new(), Vec::new());
        };
        let rule = gauss_legendre(per_cell);
        let mut xs = Vec::with_capacity(per_cell * grid.len());
        let mut ws = Vec::with_capacity(per_cell * grid.len());
        for i in 0..grid.len() - 1 {
            let (x0, x1) = (grid[i], grid[i + 1]);
            let (p0, p1) = (pdf[i], pdf[i + 1]);
            if p0 == 0.0 && p1 == 0.0 {
                continue;
            }
            let half = 0.5 * (x1 - x0);
            let mid = 0.5 * (x0 + x1);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let x = mid + half * t;
                let p = p0 + (p1 - p0) * (x - x0) / (x1 - x0);
                xs.push(x);
                ws.push(w * half * p);
            }
        }
        (xs, ws)
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = substream(seed, 0);
        let sampler = Sampler::new(self);
        (0..n).map(|_| sampler.draw(&mut rng)).collect()
    }

    /// Finite support hull, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            InputLaw::DiscreteAtoms { values, probs } => {
                let mut it = values.iter().zip(probs).filter(|(_, p)| **p > 0.0).map(|(v, _)| *v);
                let first = it.next()?;
                Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
            }
            InputLaw::GriddedDensity { grid, .. } => Some((grid[0], grid[grid.len() - 1])),
            _ => None,
        }
    }
}

/// `E X^k` for `X ~ N(mean, var)`.
pub(crate) fn normal_raw_moment(mean: f64, var: f64, k: usize) -> f64 {
    let (mut m0, mut m1) = (1.0, mean);
    if k == 0 {
        return m0;
    }
    for j in 2..=k {
        let m2 = mean * m1 + (j - 1) as f64 * var * m0;
        m0 = m1;
        m1 = m2;
    }
    m1
}

/// Reusable sampler for an [`InputLaw`].
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Atoms { values: Vec<f64>, cdf: Vec<f64> },
    Mixture { comps: Vec<MixtureComponent>, cdf: Vec<f64> },
    Grid { grid: Vec<f64>, pdf: Vec<f64>, cdf: Vec<f64> },
}

fn cumulative(ws: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = ws
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    let total = acc;
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl Sampler {
    pub fn new(law: &InputLaw) -> Self {
        let kind = match law {
            InputLaw::DiscreteAtoms { values, probs } => SamplerKind::Atoms {
                values: values.clone(),
                cdf: cumulative(probs.iter().copied()),
            },
            InputLaw::Gaussian { mean, variance } => SamplerKind::Mixture {
                comps: vec![MixtureComponent::new(1.0, *mean, *variance)],
                cdf: vec![1.0],
            },
            InputLaw::GaussianMixture { components } => SamplerKind::Mixture {
                comps: components.clone(),
                cdf: cumulative(components.iter().map(|c| c.weight)),
            },
            InputLaw::GriddedDensity { grid, pdf } => SamplerKind::Grid {
                grid: grid.clone(),
                pdf: pdf.clone(),
                cdf: cumulative(
                    grid.windows(2)
                        .zip(pdf.windows(2))
                        .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] + p[1])),
                ),
            },
        };
        Self { kind }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Atoms { values, cdf } => values[pick(cdf, rng.random::<f64>())],
            SamplerKind::Mixture { comps, cdf } => {
                let c = if comps.len() == 1 {
                    &comps[0]
                } else {
                    &comps[pick(cdf, rng.random::<f64>())]
                };
                let z: f64 = StandardNormal.sample(rng);
                c.mean + c.variance.sqrt() * z
            }
            SamplerKind::Grid { grid, pdf, cdf } => {
                let u: f64 = rng.random();
                let i = pick(cdf, u);
                let lo = if i == 0 { 0.0 } else { cdf[i - 1] };
                let width = grid[i + 1] - grid[i];
                let cell_mass = cdf[i] - lo;
                // Target mass inside the cell, in density units.
                let r = (u - lo) / cell_mass * 0.5 * width * (pdf[i] + pdf[i + 1]);
                let p0 = pdf[i];
                let slope = (pdf[i + 1] - pdf[i]) / width;
                let disc = (p0 * p0 + 2.0 * slope * r).max(0.0);
                let t = if p0 + disc.sqrt() > 0.0 {
                    2.0 * r / (p0 + disc.sqrt())
                } else {
                    0.0
                };
                grid[i] + t.clamp(0.0, width)
            }
        }
    }
}

/// Posterior summary of `X` given `Y = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    /// `log q_0(y)`, the log output density.
    pub log_density: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone)]
enum Kernel {
    /// Sorted atom locations with log weights.
    Atoms { x: Vec<f64>, logw: Vec<f64> },
    Mixture(Vec<MixtureComponent>),
}

/// Atom counts above which the posterior sum is restricted to a window.
const WINDOW_MIN_ATOMS: usize = 64;
const WINDOW_SLACK: f64 = 15.0;
const GRID_NODES_PER_CELL: usize = 8;

/// The output law of `Y = sqrt(snr) X + N` for a fixed input law and SNR.
#[derive(Debug, Clone)]
pub struct OutputDensity {
    snr: f64,
    root: f64,
    kernel: Kernel,
    mean_x: f64,
    var_x: f64,
    support: Option<(f64, f64)>,
}

impl OutputDensity {
    pub fn new(law: &InputLaw, snr: f64) -> Result<Self> {
        if !(snr >= 0.0) || !snr.is_finite() {
            return Err(Error::InvalidParameter(format!("snr must be finite and >= 0, got {snr}")));
        }
        let kernel = match law {
            InputLaw::DiscreteAtoms { values, probs } => {
                let mut pairs: Vec<(f64, f64)> = values
                    .iter()
                    .zip(probs)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, p)| (*v, p.ln()))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                Kernel::Atoms {
                    x: pairs.iter().map(|p| p.0).collect(),
                    logw: pairs.iter().map(|p| p.1).collect(),
                }
            }
            InputLaw::Gaussian { mean, variance } => {
                Kernel::Mixture(vec![MixtureComponent::new(1.0, *mean, *variance)])
            }
            InputLaw::GaussianMixture { components } => {
                Kernel::Mixture(components.iter().copied().filter(|c| c.weight > 0.0).collect())
            }
            InputLaw::GriddedDensity { .. } => {
                let (xs, ws) = law.gridded_nodes(GRID_NODES_PER_CELL);
                let mut pairs: Vec<(f64, f64)> = xs
                    .into_iter()
                    .zip(ws)
                    .filter(|(_, w)| *w > 0.0)
                    .map(|(x, w)| (x, w.ln()))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                Kernel::Atoms {
                    x: pairs.iter().map(|p| p.0).collect(),
                    logw: pairs.iter().map(|p| p.1).collect(),
                }
            }
        };
        let m = law.moments();
        Ok(Self {
            snr,
            root: snr.sqrt(),
            kernel,
            mean_x: m.mean,
            var_x: m.variance,
            support: law.support(),
        })
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Posterior mean, variance and log output density at `y`.
    pub fn posterior(&self, y: f64) -> Posterior {
        let s = self.root;
        match &self.kernel {
            Kernel::Atoms { x, logw } => {
                let (lo, hi) = self.atom_window(x, y);
                let mut emax = f64::NEG_INFINITY;
                for k in lo..hi {
                    let d = y - s * x[k];
                    emax = emax.max(logw[k] - 0.5 * d * d);
                }
                let (mut z, mut m1) = (0.0, 0.0);
                for k in lo..hi {
                    let d = y - s * x[k];
                    let r = (logw[k] - 0.5 * d * d - emax).exp();
                    z += r;
                    m1 += r * x[k];
                }
                let mean = m1 / z;
                let mut var = 0.0;
                for k in lo..hi {
                    let d = y - s * x[k];
                    let r = (logw[k] - 0.5 * d * d - emax).exp();
                    var += r * (x[k] - mean) * (x[k] - mean);
                }
                Posterior {
                    log_density: emax + z.ln() - LN_SQRT_2PI,
                    mean,
                    variance: var / z,
                }
            }
            Kernel::Mixture(comps) => {
                if comps.len() == 1 {
                    let c = &comps[0];
                    let (e, m, v) = self.component(c, y);
                    return Posterior {
                        log_density: e,
                        mean: m,
                        variance: v,
                    };
                }
                let parts: Vec<(f64, f64, f64)> = comps.iter().map(|c| self.component(c, y)).collect();
                let emax = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                let (mut z, mut m1) = (0.0, 0.0);
                for p in &parts {
                    let r = (p.0 - emax).exp();
                    z += r;
                    m1 += r * p.1;
                }
                let mean = m1 / z;
                let mut var = 0.0;
                for p in &parts {
                    let r = (p.0 - emax).exp();
                    var += r * (p.2 + (p.1 - mean).powi(2));
                }
                Posterior {
                    log_density: emax + z.ln(),
                    mean,
                    variance: var / z,
                }
            }
        }
    }

    /// (log weighted marginal density, posterior mean, posterior variance).
    fn component(&self, c: &MixtureComponent, y: f64) -> (f64, f64, f64) {
        let s = self.root;
        let out_var = 1.0 + self.snr * c.variance;
        let d = y - s * c.mean;
        let log_dens = c.weight.ln() - LN_SQRT_2PI - 0.5 * out_var.ln() - 0.5 * d * d / out_var;
        let mean = c.mean + s * c.variance * d / out_var;
        (log_dens, mean, c.variance / out_var)
    }

    fn atom_window(&self, x: &[f64], y: f64) -> (usize, usize) {
        if x.len() < WINDOW_MIN_ATOMS || self.root == 0.0 {
            return (0, x.len());
        }
        let s = self.root;
        let target = y / s;
        let i = x.partition_point(|&v| v < target);
        let near = [i.saturating_sub(1), i.min(x.len() - 1)]
            .iter()
            .map(|&k| (y - s * x[k]).abs())
            .fold(f64::INFINITY, f64::min);
        let reach = (near + WINDOW_SLACK) / s;
        let lo = x.partition_point(|&v| v < target - reach);
        let hi = x.partition_point(|&v| v <= target + reach);
        (lo, hi.max(lo + 1).min(x.len()))
    }

    /// Draws `X'` from the posterior of `X` given `Y = y` (the retrochannel).
    ///
    /// Exact for atom and mixture laws; gridded densities sample their
    /// quadrature nodes.
    pub fn sample_posterior<R: Rng + ?Sized>(&self, y: f64, rng: &mut R) -> f64 {
        let s = self.root;
        let u: f64 = rng.random();
        match &self.kernel {
            Kernel::Atoms { x, logw } => {
                let (lo, hi) = self.atom_window(x, y);
                let e: Vec<f64> = (lo..hi)
                    .map(|k| {
                        let d = y - s * x[k];
                        logw[k] - 0.5 * d * d
                    })
                    .collect();
                let emax = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let cdf = cumulative(e.iter().map(|v| (v - emax).exp()));
                x[lo + pick(&cdf, u)]
            }
            Kernel::Mixture(comps) => {
                let parts: Vec<(f64, f64, f64)> = comps.iter().map(|c| self.component(c, y)).collect();
                let emax = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                let cdf = cumulative(parts.iter().map(|p| (p.0 - emax).exp()));
                let (_, m, v) = parts[pick(&cdf, u)];
                let z: f64 = StandardNormal.sample(rng);
                m + v.sqrt() * z
            }
        }
    }

    /// `q_i(y) = E[X^i p_{Y|X}(y|X)]`.
    pub fn q_moment(&self, y: f64, i: u32) -> f64 {
        let s = self.root;
        match &self.kernel {
            Kernel::Atoms { x, logw } => x
                .iter()
                .zip(logw)
                .map(|(xk, lw)| {
                    let d = y - s * xk;
                    xk.powi(i as i32) * (lw - 0.5 * d * d - LN_SQRT_2PI).exp()
                })
                .sum(),
            Kernel::Mixture(comps) => comps
                .iter()
                .map(|c| {
                    let (e, m, v) = self.component(c, y);
                    e.exp() * normal_raw_moment(m, v, i as usize)
                })
                .sum(),
        }
    }

    /// Integration window for `y`.
    pub fn y_range(&self, spec: &QuadratureSpec) -> (f64, f64) {
        let s = self.root;
        let c = spec.y_cutoff;
        match (&self.kernel, self.support) {
            (Kernel::Atoms { .. }, Some((a, b))) => (s * a - c, s * b + c),
            (Kernel::Mixture(comps), _) => comps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
                let w = c * (1.0 + self.snr * k.variance).sqrt();
                (lo.min(s * k.mean - w), hi.max(s * k.mean + w))
            }),
            _ => {
                let w = c * (1.0 + self.snr * self.var_x).sqrt();
                (s * self.mean_x - w, s * self.mean_x + w)
            }
        }
    }

    /// `∫ g(y, posterior(y)) q_0(y) dy`.
    ///
    /// Gaussian inputs use Gauss–Hermite (checked against a half-order rule,
    /// with a composite fallback); everything else uses composite
    /// Gauss–Legendre with panel doubling over [`Self::y_range`].
    pub fn expect<G>(&self, g: G, spec: &QuadratureSpec) -> Result<f64>
    where
        G: Fn(f64, &Posterior) -> f64,
    {
        spec.validate()?;
        if let Kernel::Mixture(comps) = &self.kernel {
            if comps.len() == 1 {
                let c = comps[0];
                let mu = self.root * c.mean;
                let sd = (1.0 + self.snr * c.variance).sqrt();
                let gh = |n: usize| -> f64 {
                    let r = gauss_hermite_normal(n);
                    r.nodes
                        .iter()
                        .zip(&r.weights)
                        .map(|(z, w)| {
                            let y = mu + sd * z;
                            w * g(y, &self.posterior(y))
                        })
                        .sum()
                };
                let full = gh(spec.hermite_order);
                let half = gh((spec.hermite_order / 2).max(2));
                if (full - half).abs() <= spec.adaptive_tol {
                    return Ok(full);
                }
            }
        }
        let (lo, hi) = self.y_range(spec);
        let opts = CompositeOptions {
            initial_panels: ((hi - lo) / 1.5).ceil().max(8.0) as usize,
            abs_tol: spec.adaptive_tol,
            rel_tol: 0.0,
            max_panels: 1 << 17,
        };
        integrate_composite(
            |y| {
                let p = self.posterior(y);
                if p.log_density < -745.0 {
                    return 0.0;
                }
                g(y, &p) * p.log_density.exp()
            },
            lo,
            hi,
            opts,
            "output-domain quadrature",
        )
    }
}

/// `∫ f(y) p_{Y;snr}(y) dy` for `Y = sqrt(snr) X + N`.
pub fn integrate_output<F: Fn(f64) -> f64>(
    f: F,
    law: &InputLaw,
    snr: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    OutputDensity::new(law, snr)?.expect(|y, _| f(y), spec)
}

/// Normal density.
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}
