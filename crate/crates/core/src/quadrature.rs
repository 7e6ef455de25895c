//! Quadrature rules shared by every estimator in the crate.
//!
//! Three building blocks:
//!
//! * Gauss–Legendre rules on `[-1, 1]`, used panel-wise by
//!   [`integrate_composite`] which doubles the panel count until two
//!   successive estimates agree.
//! * Gauss–Hermite rules for expectations against the standard normal.
//! * An adaptive Gauss–Kronrod (7/15) bisection scheme for integrands whose
//!   scale is not known in advance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// A quadrature rule: nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Gauss–Hermite rule for the weight `exp(-x^2)` (physicists' convention).
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 2, "Gauss-Hermite order must be at least 2");
    let pim4 = PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // Ascending order.
    nodes.reverse();
    weights.reverse();
    Rule { nodes, weights }
}

/// Gauss–Hermite rule rescaled so that `sum w_i f(x_i) ≈ E f(Z)`, `Z ~ N(0,1)`.
pub fn gauss_hermite_normal(n: usize) -> Rule {
    let r = gauss_hermite(n);
    let s = PI.sqrt();
    Rule {
        nodes: r.nodes.iter().map(|x| x * std::f64::consts::SQRT_2).collect(),
        weights: r.weights.iter().map(|w| w / s).collect(),
    }
}

const PANEL_ORDER: usize = 20;

fn panel_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Composite Gauss–Legendre sum of `f` over `[a, b]` with `panels` equal panels.
pub fn composite_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = panel_rule();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

/// Tolerances for [`integrate_composite`].
#[derive(Debug, Clone, Copy)]
pub struct CompositeOptions {
    pub initial_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for CompositeOptions {
    fn default() -> Self {
        Self {
            initial_panels: 8,
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_panels: 1 << 16,
        }
    }
}

/// Composite Gauss–Legendre integration with panel doubling.
///
/// Stops once two successive estimates differ by at most
/// `max(abs_tol, rel_tol * |estimate|)` and returns the finer estimate.
pub fn integrate_composite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: CompositeOptions,
    what: &'static str,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = opts.initial_panels.max(1);
    let mut prev = composite_sum(&f, a, b, panels);
    let mut change = f64::INFINITY;
    while panels < opts.max_panels {
        panels *= 2;
        let next = composite_sum(&f, a, b, panels);
        change = (next - prev).abs();
        if !next.is_finite() {
            break;
        }
        if change <= opts.abs_tol.max(opts.rel_tol * next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        what,
        change,
        target: opts.abs_tol,
    })
}

const GK_XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WGK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let dx = h * GK_XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WGK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod 7/15 integration by global bisection.
///
/// The interval with the largest error estimate is split until the summed
/// error estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    what: &'static str,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS || !total.is_finite() {
            return Err(Error::NonConvergence {
                what,
                change: err,
                target: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Trapezoid rule on an arbitrary (sorted) abscissa grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(10);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // x^18 integrates to 2/19 on [-1, 1].
        let q: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(18))
            .sum();
        assert!((q - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_normal_moments() {
        for n in [2, 20, 127] {
            let r = gauss_hermite_normal(n);
            let m = |k: i32| -> f64 {
                r.nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(k))
                    .sum()
            };
            assert!((m(0) - 1.0).abs() < 1e-13, "n={n}");
            assert!((m(2) - 1.0).abs() < 1e-12, "n={n}");
            if n >= 3 {
                assert!((m(4) - 3.0).abs() < 1e-11, "n={n}");
            }
        }
        let r = gauss_hermite_normal(127);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        let m8: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert!((m8 - 105.0).abs() < 1e-9);
    }

    #[test]
    fn composite_and_adaptive_agree_on_gaussian_integral() {
        let f = |x: f64| (-0.5 * x * x).exp();
        let exact = (2.0 * PI).sqrt();
        let c = integrate_composite(f, -40.0, 40.0, CompositeOptions::default(), "test").unwrap();
        let a = integrate_adaptive(f, -40.0, 40.0, 1e-13, 1e-13, "test").unwrap();
        assert!((c - exact).abs() < 1e-12);
        assert!((a - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_kink() {
        let v = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-11, 1e-11, "sqrt").unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn composite_reports_non_convergence() {
        let opts = CompositeOptions {
            max_panels: 16,
            ..Default::default()
        };
        let r = integrate_composite(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, opts, "oscillatory");
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
