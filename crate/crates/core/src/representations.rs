//! Entropy, non-Gaussianness, differential entropy and mutual information
//! written as SNR integrals of MMSE differences.
//!
//! All integrals run over `[0, snr_max]` and are completed by a tail
//! estimate. The body uses Gauss–Legendre on `[0, 1e-3]` and Simpson's rule
//! in `ln snr` on a geometric grid with 40 points per decade above that.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::inputs::{InputLaw, MixtureComponent, OutputDensity, QuadratureSpec};
use crate::quadrature::{gauss_legendre, integrate_composite, CompositeOptions};
use crate::report::{fit_slope, Check, Report};
use crate::scalar::ScalarChannel;

/// Lower end of the geometric grid.
const GRID_START: f64 = 1e-3;
const POINTS_PER_DECADE: f64 = 40.0;
/// Relative size of the last integrand value above which an untreated tail
/// is an error.
const TAIL_THRESHOLD: f64 = 1e-4;
/// Integrand magnitude at `snr_max` treated as quadrature noise; no tail is
/// fitted below it.
const NOISE_FLOOR: f64 = 1e-13;
/// Smallest positive atom probability accepted by the entropy integral.
const MIN_ATOM_PROB: f64 = 1e-6;

/// How the integral beyond `snr_max` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEstimator {
    /// No tail; fails if the integrand has not died out.
    None,
    /// Algebraic decay `c snr^{-p}` fitted over the last decade.
    GaussianTail,
    /// Exponential decay `c e^{-r snr}` fitted over the last decade.
    ExponentialFit,
}

/// Upper limit and tail treatment of an SNR integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    pub snr_max: f64,
    pub tail_estimator: TailEstimator,
}

impl TailPolicy {
    pub fn new(snr_max: f64, tail_estimator: TailEstimator) -> Result<Self> {
        let p = Self {
            snr_max,
            tail_estimator,
        };
        p.validate()?;
        Ok(p)
    }

    /// Defaults for discrete laws: `snr_max = 80` with an exponential tail.
    pub fn discrete() -> Self {
        Self {
            snr_max: 80.0,
            tail_estimator: TailEstimator::ExponentialFit,
        }
    }

    /// Defaults for laws with a density: `snr_max = 1e4` with an algebraic tail.
    pub fn density() -> Self {
        Self {
            snr_max: 1e4,
            tail_estimator: TailEstimator::GaussianTail,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.snr_max >= 1.0) || !self.snr_max.is_finite() {
            return Err(invalid("snr_max must be finite and >= 1"));
        }
        Ok(())
    }
}

/// An SNR integral with its pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrIntegral {
    /// Body plus tail.
    pub value: f64,
    /// `∫_0^{snr_max}`.
    pub body: f64,
    pub tail: f64,
    /// Integrand at `snr_max`.
    pub last: f64,
    /// Fitted decay parameter (rate or power), if a fit was made.
    pub fitted_decay: Option<f64>,
    /// RMS residual of the log-domain tail fit.
    pub fit_residual: Option<f64>,
}

/// The geometric grid `1e-3 .. snr_max` with an even number of intervals.
pub fn snr_grid(snr_max: f64) -> Vec<f64> {
    let (lo, hi) = (GRID_START.ln(), snr_max.ln());
    let mut n = ((hi - lo) / std::f64::consts::LN_10 * POINTS_PER_DECADE).ceil() as usize;
    n = n.max(2);
    n += n % 2;
    (0..=n)
        .map(|k| match k {
            0 => GRID_START,
            k if k == n => snr_max,
            _ => (lo + (hi - lo) * k as f64 / n as f64).exp(),
        })
        .collect()
}

fn fit_tail(grid: &[f64], values: &[f64], estimator: TailEstimator) -> Result<(f64, Option<f64>, Option<f64>)> {
    let smax = *grid.last().expect("non-empty grid");
    let last = *values.last().expect("non-empty grid");
    if estimator == TailEstimator::None || last.abs() <= NOISE_FLOOR {
        return Ok((0.0, None, None));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(values)
        .filter(|(s, v)| **s >= smax / 10.0 && **v > 0.0)
        .map(|(s, v)| {
            let x = if estimator == TailEstimator::ExponentialFit { *s } else { s.ln() };
            (x, v.ln())
        })
        .unzip();
    if xs.len() < 3 || last <= 0.0 {
        return Err(Error::TailNotResolved {
            integrand: last,
            threshold: 0.0,
        });
    }
    let slope = fit_slope(&xs, &ys);
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    match estimator {
        TailEstimator::ExponentialFit => {
            let rate = -slope;
            if !(rate > 0.0) {
                return Err(Error::TailNotResolved {
                    integrand: last,
                    threshold: 0.0,
                });
            }
            Ok((last / rate, Some(rate), Some(residual)))
        }
        TailEstimator::GaussianTail => {
            let power = -slope;
            if !(power > 1.0) {
                return Err(Error::TailNotResolved {
                    integrand: last,
                    threshold: 0.0,
                });
            }
            Ok((last * smax / (power - 1.0), Some(power), Some(residual)))
        }
        TailEstimator::None => unreachable!(),
    }
}

/// `∫_0^∞ f(snr) dsnr` as body on `[0, snr_max]` plus tail.
///
/// `f` is evaluated in parallel at the grid nodes.
pub fn snr_integral<F>(f: F, tail: &TailPolicy) -> Result<SnrIntegral>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    tail.validate()?;
    let gl = gauss_legendre(8);
    let head_nodes: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * GRID_START * (x + 1.0)).collect();
    let head_vals = head_nodes.par_iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    let head: f64 = 0.5 * GRID_START * gl.weights.iter().zip(&head_vals).map(|(w, v)| w * v).sum::<f64>();

    let grid = snr_grid(tail.snr_max);
    let values = grid.par_iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    let n = grid.len() - 1;
    let h = (tail.snr_max.ln() - GRID_START.ln()) / n as f64;
    let simpson: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * values[k] * grid[k]
        })
        .sum::<f64>()
        * h
        / 3.0;
    let body = head + simpson;
    let last = values[n];
    if tail.tail_estimator == TailEstimator::None {
        let threshold = TAIL_THRESHOLD * body.abs();
        if last.abs() > threshold {
            return Err(Error::TailNotResolved {
                integrand: last,
                threshold,
            });
        }
    }
    let (tail_value, fitted_decay, fit_residual) = fit_tail(&grid, &values, tail.tail_estimator)?;
    Ok(SnrIntegral {
        value: body + tail_value,
        body,
        tail: tail_value,
        last,
        fitted_decay,
        fit_residual,
    })
}

/// Running integral `∫_0^{s_k} f` at the even grid nodes (no tail).
pub fn running_snr_integral<F>(f: F, snr_max: f64) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(snr_max >= 1.0) {
        return Err(invalid("snr_max must be >= 1"));
    }
    let gl = gauss_legendre(8);
    let head: f64 = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(x, w)| Ok(w * f(0.5 * GRID_START * (x + 1.0))?))
        .sum::<Result<f64>>()?
        * 0.5
        * GRID_START;
    let grid = snr_grid(snr_max);
    let values = grid.par_iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    let h = (snr_max.ln() - GRID_START.ln()) / (grid.len() - 1) as f64;
    let mut out = vec![(grid[0], head)];
    let mut acc = head;
    for k in (2..grid.len()).step_by(2) {
        acc += h / 3.0 * (values[k - 2] * grid[k - 2] + 4.0 * values[k - 1] * grid[k - 1] + values[k] * grid[k]);
        out.push((grid[k], acc));
    }
    Ok(out)
}

/// One-to-one relabelling of atom values before integrating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mapping {
    Identity,
    Affine { scale: f64, shift: f64 },
    /// `x ↦ x³`.
    Cubic,
}

impl Mapping {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Mapping::Identity => x,
            Mapping::Affine { scale, shift } => scale * x + shift,
            Mapping::Cubic => x * x * x,
        }
    }
}

fn mmse_of(law: &InputLaw, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    ScalarChannel::with_quadrature(law.clone(), snr, *quad)?.mmse()
}

fn discrete_parts(law: &InputLaw) -> Result<(&[f64], &[f64])> {
    match law {
        InputLaw::DiscreteAtoms { values, probs } => Ok((values, probs)),
        _ => Err(Error::InvalidLaw("operation needs a discrete atom law".into())),
    }
}

/// `H(X) = ½ ∫_0^∞ mmse(g(X), snr) dsnr` in nats.
pub fn entropy_via_mmse(law: &InputLaw, g: Mapping, tail: &TailPolicy) -> Result<SnrIntegral> {
    law.validate()?;
    let (values, probs) = discrete_parts(law)?;
    if probs.iter().any(|p| *p > 0.0 && *p < MIN_ATOM_PROB) {
        return Err(Error::InvalidLaw(format!(
            "atom probabilities below {MIN_ATOM_PROB} make the tail fit unreliable"
        )));
    }
    let mapped: Vec<f64> = values.iter().map(|v| g.apply(*v)).collect();
    let mut sorted = mapped.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.iter().any(|v| !v.is_finite()) {
        return Err(invalid("mapping must be one-to-one on the atoms"));
    }
    let relabelled = InputLaw::atoms(mapped, probs.to_vec())?;
    let quad = QuadratureSpec::default();
    let mut r = snr_integral(|s| mmse_of(&relabelled, s, &quad), tail)?;
    scale(&mut r, 0.5);
    Ok(r)
}

fn scale(r: &mut SnrIntegral, c: f64) {
    r.value *= c;
    r.body *= c;
    r.tail *= c;
    r.last *= c;
}

/// `-Σ p ln p`.
pub fn discrete_entropy(law: &InputLaw) -> Result<f64> {
    let (_, probs) = discrete_parts(law)?;
    Ok(-probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>())
}

/// Integrand of the non-Gaussianness: `σ²/(1 + snr σ²) - mmse(snr)`.
pub fn nongaussianness_integrand(law: &InputLaw, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    let var = law.variance();
    Ok(var / (1.0 + snr * var) - mmse_of(law, snr, quad)?)
}

/// `D(P_X || N(E X, Var X)) = ½ ∫ [σ²/(1 + snr σ²) - mmse(snr)] dsnr`.
pub fn nongaussianness(law: &InputLaw, tail: &TailPolicy) -> Result<SnrIntegral> {
    law.validate()?;
    let quad = QuadratureSpec::default();
    let mut r = snr_integral(|s| nongaussianness_integrand(law, s, &quad), tail)?;
    scale(&mut r, 0.5);
    Ok(r)
}

/// `h(X) = ½ ln(2πe σ²) - D(X)`.
pub fn differential_entropy_via_mmse(law: &InputLaw, tail: &TailPolicy) -> Result<f64> {
    if !law.has_density() {
        return Err(Error::InvalidLaw("differential entropy needs a law with a density".into()));
    }
    let d = nongaussianness(law, tail)?.value;
    Ok(0.5 * (2.0 * PI * std::f64::consts::E * law.variance()).ln() - d)
}

/// `γ_X = e^{-D(X)}`.
pub fn gamma(law: &InputLaw, tail: &TailPolicy) -> Result<f64> {
    Ok((-nongaussianness(law, tail)?.value).exp())
}

fn as_components(law: &InputLaw) -> Result<Vec<MixtureComponent>> {
    match law {
        InputLaw::Gaussian { mean, variance } => Ok(vec![MixtureComponent::new(1.0, *mean, *variance)]),
        InputLaw::GaussianMixture { components } => Ok(components.clone()),
        _ => Err(Error::InvalidLaw(
            "entropy-power check needs Gaussian or Gaussian-mixture laws".into(),
        )),
    }
}

/// Law of `A + B` for independent Gaussian/mixture `A`, `B`.
pub fn convolve(a: &InputLaw, b: &InputLaw) -> Result<InputLaw> {
    let (ca, cb) = (as_components(a)?, as_components(b)?);
    if ca.len() == 1 && cb.len() == 1 {
        return InputLaw::gaussian(ca[0].mean + cb[0].mean, ca[0].variance + cb[0].variance);
    }
    let mut out = Vec::with_capacity(ca.len() * cb.len());
    for x in &ca {
        for y in &cb {
            out.push(MixtureComponent::new(x.weight * y.weight, x.mean + y.mean, x.variance + y.variance));
        }
    }
    InputLaw::mixture(out)
}

/// `α γ_A² + (1-α) γ_B² <= γ_{A+B}²` with `α = σ_A² / (σ_A² + σ_B²)`.
pub fn gamma_epi_check(a: &InputLaw, b: &InputLaw, tail: &TailPolicy) -> Result<Report> {
    let sum = convolve(a, b)?;
    let (va, vb) = (a.variance(), b.variance());
    let alpha = va / (va + vb);
    let (ga, gb, gs) = (gamma(a, tail)?, gamma(b, tail)?, gamma(&sum, tail)?);
    let mut report = Report::new("gamma_epi");
    for (name, g) in [("gamma_A", ga), ("gamma_B", gb), ("gamma_A+B", gs)] {
        report.push(Check::within(format!("{name} in (0, 1]"), g, 0.0, 1.0 + 1e-9));
    }
    report.push(Check::at_most(
        "alpha gamma_A^2 + (1 - alpha) gamma_B^2 <= gamma_A+B^2",
        alpha * ga * ga + (1.0 - alpha) * gb * gb,
        gs * gs,
        1e-6,
    ));
    Ok(report)
}

/// One atom of a finite joint law of `(X, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAtom {
    pub x: f64,
    pub z: f64,
    pub prob: f64,
}

fn z_law(atoms: &[(f64, f64)]) -> Result<InputLaw> {
    let mut merged: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for &(z, p) in atoms {
        let e = merged.entry(z.to_bits()).or_insert((z, 0.0));
        e.1 += p;
    }
    let total: f64 = merged.values().map(|v| v.1).sum();
    let (values, probs) = merged.values().map(|(z, p)| (*z, p / total)).unzip();
    InputLaw::atoms(values, probs)
}

/// `I(X; Z) = ½ ∫ [mmse(Z | Y) - mmse(Z | Y, X)] dsnr` with
/// `Y = sqrt(snr) Z + N`, for a finite joint law.
pub fn mi_via_mmse_difference(joint: &[JointAtom], tail: &TailPolicy) -> Result<SnrIntegral> {
    if joint.is_empty() {
        return Err(Error::InvalidLaw("joint law must be non-empty".into()));
    }
    if joint.iter().any(|a| !(a.prob >= 0.0) || !a.x.is_finite() || !a.z.is_finite()) {
        return Err(Error::InvalidLaw("joint atoms need finite values and probabilities >= 0".into()));
    }
    let total: f64 = joint.iter().map(|a| a.prob).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidLaw(format!("joint probabilities sum to {total}")));
    }
    let marginal = z_law(&joint.iter().map(|a| (a.z, a.prob)).collect::<Vec<_>>())?;
    let mut by_x: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for a in joint.iter().filter(|a| a.prob > 0.0) {
        by_x.entry(a.x.to_bits()).or_default().push((a.z, a.prob));
    }
    let conditionals = by_x
        .values()
        .map(|v| Ok((v.iter().map(|p| p.1).sum::<f64>(), z_law(v)?)))
        .collect::<Result<Vec<_>>>()?;
    let quad = QuadratureSpec::default();
    let integrand = |s: f64| -> Result<f64> {
        let mut cond = 0.0;
        for (w, law) in &conditionals {
            cond += w * mmse_of(law, s, &quad)?;
        }
        Ok(mmse_of(&marginal, s, &quad)? - cond)
    };
    let mut r = snr_integral(integrand, tail)?;
    scale(&mut r, 0.5);
    Ok(r)
}

/// `D(P_Y || P_Y')` for `Y = sqrt(snr) X + N` and `Y' = sqrt(snr) X' + N`.
pub fn output_divergence(p: &InputLaw, q: &InputLaw, snr: f64) -> Result<f64> {
    let (dp, dq) = (OutputDensity::new(p, snr)?, OutputDensity::new(q, snr)?);
    let quad = QuadratureSpec::default();
    let (a0, b0) = dp.y_range(&quad);
    let (a1, b1) = dq.y_range(&quad);
    let (lo, hi) = (a0.min(a1), b0.max(b1));
    let opts = CompositeOptions {
        initial_panels: ((hi - lo) / 1.5).ceil().max(8.0) as usize,
        abs_tol: 1e-11,
        rel_tol: 0.0,
        max_panels: 1 << 17,
    };
    let v = integrate_composite(
        |y| {
            let lp = dp.posterior(y).log_density;
            if lp < -745.0 {
                return 0.0;
            }
            lp.exp() * (lp - dq.posterior(y).log_density)
        },
        lo,
        hi,
        opts,
        "output divergence",
    )?;
    Ok(v.max(0.0))
}

/// `D(P_Y || P_Y')` along an increasing SNR grid; data processing makes it
/// nondecreasing in SNR.
pub fn divergence_monotonicity(p: &InputLaw, q: &InputLaw, snr_grid: &[f64]) -> Result<Report> {
    let values = snr_grid
        .iter()
        .map(|&s| output_divergence(p, q, s))
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("divergence_monotonicity");
    for (w, s) in values.windows(2).zip(snr_grid.windows(2)) {
        report.push(Check::at_most(format!("D at snr={} <= D at snr={}", s[0], s[1]), w[0], w[1], 1e-10));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = snr_grid(80.0);
        assert_eq!(g[0], 1e-3);
        assert_eq!(*g.last().unwrap(), 80.0);
        assert_eq!((g.len() - 1) % 2, 0);
        let per_decade = (g.len() - 1) as f64 / (8e4f64).log10();
        assert!((per_decade - 40.0).abs() < 1.0);
    }

    #[test]
    fn integral_of_known_functions() {
        let tail = TailPolicy::new(50.0, TailEstimator::ExponentialFit).unwrap();
        let r = snr_integral(|s| Ok((-0.5 * s).exp()), &tail).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
        assert!((r.fitted_decay.unwrap() - 0.5).abs() < 1e-9);
        let tail = TailPolicy::new(1e3, TailEstimator::GaussianTail).unwrap();
        let r = snr_integral(|s| Ok(1.0 / (1.0 + s).powi(2)), &tail).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn untreated_tail_is_an_error() {
        let tail = TailPolicy::new(10.0, TailEstimator::None).unwrap();
        assert!(matches!(
            snr_integral(|s| Ok(1.0 / (1.0 + s)), &tail),
            Err(Error::TailNotResolved { .. })
        ));
        assert!(TailPolicy::new(0.5, TailEstimator::None).is_err());
    }

    #[test]
    fn entropy_of_four_atoms() {
        let law = InputLaw::atoms(vec![-3.0, -1.0, 1.0, 3.0], vec![0.25; 4]).unwrap();
        let h = entropy_via_mmse(&law, Mapping::Identity, &TailPolicy::discrete()).unwrap();
        assert!((h.value - 4f64.ln()).abs() < 1e-3, "{h:?}");
        let affine = entropy_via_mmse(&law, Mapping::Affine { scale: 2.0, shift: 1.0 }, &TailPolicy::discrete()).unwrap();
        assert!((h.value - affine.value).abs() < 2e-3);
        let single = InputLaw::atoms(vec![0.7], vec![1.0]).unwrap();
        assert_eq!(entropy_via_mmse(&single, Mapping::Identity, &TailPolicy::discrete()).unwrap().value, 0.0);
    }

    #[test]
    fn entropy_rejects_bad_inputs() {
        let law = InputLaw::atoms(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let squash = Mapping::Affine { scale: 0.0, shift: 1.0 };
        assert!(entropy_via_mmse(&law, squash, &TailPolicy::discrete()).is_err());
        let skewed = InputLaw::atoms(vec![-1.0, 1.0], vec![1.0 - 1e-8, 1e-8]).unwrap();
        assert!(entropy_via_mmse(&skewed, Mapping::Identity, &TailPolicy::discrete()).is_err());
        assert!(entropy_via_mmse(&InputLaw::standard_gaussian(), Mapping::Identity, &TailPolicy::discrete()).is_err());
    }

    #[test]
    fn gaussian_is_gaussian() {
        let d = nongaussianness(&InputLaw::gaussian(0.0, 1.0).unwrap(), &TailPolicy::density()).unwrap();
        assert!(d.value.abs() <= 1e-9);
        let h = differential_entropy_via_mmse(&InputLaw::gaussian(0.0, 4.0).unwrap(), &TailPolicy::density()).unwrap();
        assert!((h - 0.5 * (8.0 * PI * std::f64::consts::E).ln()).abs() < 1e-12);
    }

    #[test]
    fn binary_nongaussianness_diverges() {
        let law = InputLaw::binary();
        let quad = QuadratureSpec::default();
        let run = running_snr_integral(|s| Ok(0.5 * nongaussianness_integrand(&law, s, &quad)?), 100.0).unwrap();
        let (_, last) = *run.last().unwrap();
        assert!(last > 1.0, "{last}");
        assert!(run.windows(2).rev().take(10).all(|w| w[1].1 > w[0].1));
        let tail = TailPolicy::new(100.0, TailEstimator::None).unwrap();
        assert!(nongaussianness(&law, &tail).is_err());
    }

    #[test]
    fn convolution_of_mixtures() {
        let a = InputLaw::gaussian(1.0, 2.0).unwrap();
        let b = InputLaw::mixture(vec![
            MixtureComponent::new(0.3, -1.0, 0.5),
            MixtureComponent::new(0.7, 2.0, 0.1),
        ])
        .unwrap();
        let s = convolve(&a, &b).unwrap();
        assert!((s.mean() - (a.mean() + b.mean())).abs() < 1e-14);
        assert!((s.variance() - (a.variance() + b.variance())).abs() < 1e-13);
        let g = convolve(&a, &a).unwrap();
        assert_eq!(g, InputLaw::gaussian(2.0, 4.0).unwrap());
    }

    #[test]
    fn epi_gaussian_equality() {
        let a = InputLaw::gaussian(0.0, 1.0).unwrap();
        let b = InputLaw::gaussian(1.0, 3.0).unwrap();
        let r = gamma_epi_check(&a, &b, &TailPolicy::density()).unwrap();
        assert!(r.passed());
        let c = r.checks.last().unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-12 && (c.rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mi_difference_independent_is_zero() {
        let joint: Vec<JointAtom> = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
            .iter()
            .map(|&(x, z)| JointAtom { x, z, prob: 0.25 })
            .collect();
        let r = mi_via_mmse_difference(&joint, &TailPolicy::discrete()).unwrap();
        assert!(r.value.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn output_divergence_grows_with_snr() {
        let p = InputLaw::mixture(vec![
            MixtureComponent::new(0.5, -1.0, 0.25),
            MixtureComponent::new(0.5, 1.0, 0.25),
        ])
        .unwrap();
        let q = InputLaw::gaussian(0.0, 1.25).unwrap();
        let r = divergence_monotonicity(&p, &q, &[0.1, 0.5, 1.0, 4.0, 16.0]).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(output_divergence(&p, &q, 0.0).unwrap() < 1e-12);
    }
}
