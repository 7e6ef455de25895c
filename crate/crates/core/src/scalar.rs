//! The scalar Gaussian channel `Y = sqrt(snr) X + N`.
//!
//! Conditional-mean estimation, MMSE, mutual information (nats), Fisher
//! information of the output, low/high-SNR asymptotics and the checks that
//! tie them together: `dI/dsnr = mmse / 2` and its corollaries.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::inputs::{InputLaw, Moments, OutputDensity, QuadratureSpec, Sampler};
use crate::mc::{run_iid, substream, Estimate, McConfig};
use crate::quadrature::{integrate_adaptive, integrate_composite, trapezoid, CompositeOptions};
use crate::report::{fit_slope, Check, Report};

/// `½ ln(2πe)`, the differential entropy of a standard normal.
pub const HALF_LN_2PI_E: f64 = 1.418_938_533_204_672_7;

/// A scalar channel with its input law, SNR and quadrature controls.
#[derive(Debug, Clone)]
pub struct ScalarChannel {
    law: InputLaw,
    snr: f64,
    quad: QuadratureSpec,
    out: OutputDensity,
}

impl ScalarChannel {
    pub fn new(law: InputLaw, snr: f64) -> Result<Self> {
        Self::with_quadrature(law, snr, QuadratureSpec::default())
    }

    pub fn with_quadrature(law: InputLaw, snr: f64, quad: QuadratureSpec) -> Result<Self> {
        law.validate()?;
        quad.validate()?;
        let out = OutputDensity::new(&law, snr)?;
        Ok(Self {
            law,
            snr,
            quad,
            out,
        })
    }

    /// Same law and quadrature at another SNR.
    pub fn at_snr(&self, snr: f64) -> Result<Self> {
        Self::with_quadrature(self.law.clone(), snr, self.quad)
    }

    pub fn law(&self) -> &InputLaw {
        &self.law
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn output(&self) -> &OutputDensity {
        &self.out
    }

    /// `q_i(y) = E[X^i p_{Y|X;snr}(y|X)]`; `q_0` is the output density.
    pub fn q_moment(&self, y: f64, i: u32) -> f64 {
        self.out.q_moment(y, i)
    }

    /// `E[X | Y = y]`, evaluated in the log domain.
    pub fn conditional_mean(&self, y: f64) -> f64 {
        self.out.posterior(y).mean
    }

    /// `d/dy log q_0(y) = sqrt(snr) E[X|Y=y] - y`.
    pub fn score(&self, y: f64) -> f64 {
        self.snr.sqrt() * self.conditional_mean(y) - y
    }

    /// Noncausal MMSE `E[(X - E[X|Y])^2]`.
    ///
    /// Integrates the posterior variance against the output density, which
    /// equals `E X^2 - ∫ q_1^2 / q_0` without the cancellation at high SNR.
    pub fn mmse(&self) -> Result<f64> {
        if self.snr == 0.0 {
            return Ok(self.law.variance());
        }
        self.out.expect(|_, p| p.variance, &self.quad)
    }

    /// `I(X; Y) = -½ ln(2πe) - ∫ q_0 ln q_0` in nats.
    pub fn mutual_information(&self) -> Result<f64> {
        if self.snr == 0.0 {
            return Ok(0.0);
        }
        let neg_entropy = self.out.expect(|_, p| p.log_density, &self.quad)?;
        Ok((-HALF_LN_2PI_E - neg_entropy).max(0.0))
    }

    /// Output Fisher information via `J = 1 - snr * mmse`.
    pub fn fisher_information(&self) -> Result<f64> {
        Ok(1.0 - self.snr * self.mmse()?)
    }

    /// Output Fisher information via `E[(d/dy log q_0)^2]`.
    pub fn fisher_information_direct(&self) -> Result<f64> {
        let root = self.snr.sqrt();
        self.out.expect(|y, p| (root * p.mean - y).powi(2), &self.quad)
    }

    /// `E[(X - X̂) X̂]` with `E[X X̂]` taken through `q_1`.
    pub fn orthogonality_residual(&self) -> Result<f64> {
        let cross = self.out.expect(
            |y, p| {
                let q0 = p.log_density.exp();
                if q0 == 0.0 {
                    0.0
                } else {
                    self.out.q_moment(y, 1) / q0 * p.mean
                }
            },
            &self.quad,
        )?;
        let power = self.out.expect(|_, p| p.mean * p.mean, &self.quad)?;
        Ok(cross - power)
    }
}

fn mmse_at(law: &InputLaw, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    ScalarChannel::with_quadrature(law.clone(), snr, *quad)?.mmse()
}

fn mi_at(law: &InputLaw, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    ScalarChannel::with_quadrature(law.clone(), snr, *quad)?.mutual_information()
}

/// `ln cosh(w)` without overflow or loss of precision near zero.
pub fn ln_cosh(w: f64) -> f64 {
    let a = w.abs();
    if a < 1.0 {
        let s = (0.5 * a).sinh();
        (2.0 * s * s).ln_1p()
    } else {
        a + (-2.0 * a).exp().ln_1p() - LN_2
    }
}

fn standard_normal_expectation<F: Fn(f64) -> f64>(f: F, snr: f64, what: &'static str) -> Result<f64> {
    let root = snr.sqrt();
    let lo = -(root + 14.0);
    let hi = 14.0;
    let opts = CompositeOptions {
        initial_panels: 16 * (1.0 + snr).sqrt().ceil() as usize,
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_panels: 1 << 16,
    };
    integrate_composite(
        |z| f(z) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt(),
        lo,
        hi,
        opts,
        what,
    )
}

/// Binary-input MMSE `1 - E tanh(snr + sqrt(snr) Z)`.
pub fn mmse_binary_closed(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(invalid("snr must be >= 0"));
    }
    if snr == 0.0 {
        return Ok(1.0);
    }
    let root = snr.sqrt();
    // 1 - tanh(w) = 2 / (1 + e^{2w})
    standard_normal_expectation(
        |z| 2.0 / (1.0 + (2.0 * (snr + root * z)).exp()),
        snr,
        "binary MMSE closed form",
    )
}

/// Binary-input mutual information `snr - E ln cosh(snr + sqrt(snr) Z)`.
pub fn mi_binary_closed(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(invalid("snr must be >= 0"));
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    let root = snr.sqrt();
    let e = standard_normal_expectation(|z| ln_cosh(snr + root * z), snr, "binary MI closed form")?;
    Ok(snr - e)
}

/// Default finite-difference step `1e-4 * max(1, snr)`.
pub fn default_fd_step(snr: f64) -> f64 {
    1e-4 * snr.max(1.0)
}

/// Central (or, at the lower edge, second-order one-sided) derivative.
pub(crate) fn derivative<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    if x - h < 0.0 {
        let (f0, f1, f2) = (f(x)?, f(x + h)?, f(x + 2.0 * h)?);
        Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
    } else {
        Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
    }
}

/// Compares `dI/dsnr` by finite differences with `mmse / 2` on a grid.
pub fn verify_immse(
    law: &InputLaw,
    snr_grid: &[f64],
    fd_step: Option<f64>,
    tolerance: f64,
    quad: &QuadratureSpec,
) -> Result<Report> {
    let mut report = Report::new("immse");
    for &s in snr_grid {
        let h = fd_step.unwrap_or_else(|| default_fd_step(s));
        let slope = derivative(|x| mi_at(law, x, quad), s, h)?;
        let half_mmse = 0.5 * mmse_at(law, s, quad)?;
        report.push(Check::close(format!("dI/dsnr vs mmse/2 at snr={s}"), slope, half_mmse, tolerance));
    }
    Ok(report)
}

/// Quadrature rule for `½ ∫_0^snr mmse(γ) dγ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IntegralRule {
    /// Trapezoid on this many equally spaced points.
    Trapezoid(usize),
    /// Adaptive Gauss–Kronrod with this absolute tolerance.
    Adaptive(f64),
}

/// `½ ∫_0^snr mmse(γ) dγ`, the integral form of the I-MMSE relation.
pub fn mi_from_mmse_integral(law: &InputLaw, snr: f64, rule: IntegralRule, quad: &QuadratureSpec) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(invalid("snr must be >= 0"));
    }
    let integral = match rule {
        IntegralRule::Trapezoid(points) => {
            if points < 2 {
                return Err(invalid("trapezoid needs at least two points"));
            }
            let xs: Vec<f64> = (0..points).map(|i| snr * i as f64 / (points - 1) as f64).collect();
            let ys = xs.iter().map(|&g| mmse_at(law, g, quad)).collect::<Result<Vec<_>>>()?;
            trapezoid(&xs, &ys)
        }
        IntegralRule::Adaptive(tol) => {
            // Errors inside the closure surface as NaN and fail convergence.
            let v = integrate_adaptive(
                |g| mmse_at(law, g, quad).unwrap_or(f64::NAN),
                0.0,
                snr,
                tol,
                0.0,
                "SNR integral of the MMSE",
            )?;
            if v.is_nan() {
                return Err(Error::NonConvergence {
                    what: "SNR integral of the MMSE",
                    change: f64::NAN,
                    target: tol,
                });
            }
            v
        }
    };
    Ok(0.5 * integral)
}

/// The SNR-incremental channel `Y1 = X + σ1 N1`, `Y2 = Y1 + σ2 N2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementalPair {
    pub snr: f64,
    pub delta: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

/// Noise variances with `σ1² = 1/(snr+δ)` and `σ1² + σ2² = 1/snr`.
pub fn incremental_decompose(snr: f64, delta: f64) -> Result<IncrementalPair> {
    if !(snr > 0.0) || !(delta > 0.0) {
        return Err(invalid("incremental channel needs snr > 0 and delta > 0"));
    }
    let sigma1_sq = 1.0 / (snr + delta);
    Ok(IncrementalPair {
        snr,
        delta,
        sigma1_sq,
        sigma2_sq: 1.0 / snr - sigma1_sq,
    })
}

impl IncrementalPair {
    /// Samples `(Y1, Y2)` from the cascade.
    pub fn sample_cascade(&self, law: &InputLaw, seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let sampler = Sampler::new(law);
        let mut rng = substream(seed, 0);
        let (s1, s2) = (self.sigma1_sq.sqrt(), self.sigma2_sq.sqrt());
        (0..n)
            .map(|_| {
                let x = sampler.draw(&mut rng);
                let n1: f64 = StandardNormal.sample(&mut rng);
                let n2: f64 = StandardNormal.sample(&mut rng);
                let y1 = x + s1 * n1;
                (y1, y1 + s2 * n2)
            })
            .unzip()
    }

    /// Samples the direct channel `X + N / sqrt(snr)`.
    pub fn sample_direct(&self, law: &InputLaw, seed: u64, n: usize) -> Vec<f64> {
        let sampler = Sampler::new(law);
        let mut rng = substream(seed, 1);
        let sd = (1.0 / self.snr).sqrt();
        (0..n)
            .map(|_| {
                let x = sampler.draw(&mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                x + sd * z
            })
            .collect()
    }

    /// `N = (δ σ1 N1 - snr σ2 N2) / sqrt(δ)`, the innovation noise that is
    /// independent of `(X, Y2)`.
    pub fn innovation_noise(&self, n1: f64, n2: f64) -> f64 {
        (self.delta * self.sigma1_sq.sqrt() * n1 - self.snr * self.sigma2_sq.sqrt() * n2) / self.delta.sqrt()
    }
}

/// `I(δ)/δ → Var(X)/2` and the quadratic scaling of `I(δ) - δ Var(X)/2`.
pub fn lemma1_low_snr(law: &InputLaw, deltas: &[f64], quad: &QuadratureSpec) -> Result<Report> {
    let var = law.variance();
    let mut report = Report::new("lemma1");
    let mut logs = Vec::new();
    for &d in deltas {
        let i = mi_at(law, d, quad)?;
        let ratio = i / d;
        if d <= 1e-3 {
            report.push(Check::close(format!("I(δ)/δ at δ={d}"), ratio, 0.5 * var, 0.01 * 0.5 * var));
        }
        logs.push((d.ln(), (i - 0.5 * d * var).abs().ln()));
    }
    if logs.len() >= 2 {
        let xs: Vec<f64> = logs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = logs.iter().map(|p| p.1).collect();
        report.push(Check::close("deficiency log-log slope", fit_slope(&xs, &ys), 2.0, 0.1));
    }
    Ok(report)
}

/// One Monte Carlo sample of the retrochannel divergence-derivative formula.
fn divergence_sample<R: Rng>(out: &OutputDensity, x: f64, root: f64, rng: &mut R) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    let y = root * x + n;
    let xp = out.sample_posterior(y, rng);
    0.5 * (x - xp).powi(2) - xp * n / (2.0 * root)
}

/// `d/dsnr D(P_{Y|X=x} || P_Y)` estimated as
/// `½ E|x - X'|² - E[X' N] / (2 sqrt(snr))` with `X'` drawn from the
/// posterior given `Y = sqrt(snr) x + N`.
///
/// Both terms use the same `(N, X')` draws.
pub fn divergence_derivative(law: &InputLaw, x: f64, snr: f64, mc: &McConfig) -> Result<Estimate> {
    if !(snr > 0.0) {
        return Err(invalid("divergence derivative needs snr > 0"));
    }
    mc.check()?;
    let out = OutputDensity::new(law, snr)?;
    let root = snr.sqrt();
    let bank = run_iid(mc.seed, mc.paths, 1, |rng, buf| {
        buf[0] = divergence_sample(&out, x, root, rng);
    });
    Ok(bank.0[0].estimate())
}

/// [`divergence_derivative`] averaged over `x ~ law`; equals `mmse / 2`.
pub fn averaged_divergence_derivative(law: &InputLaw, snr: f64, mc: &McConfig) -> Result<Estimate> {
    if !(snr > 0.0) {
        return Err(invalid("divergence derivative needs snr > 0"));
    }
    mc.check()?;
    let out = OutputDensity::new(law, snr)?;
    let sampler = Sampler::new(law);
    let root = snr.sqrt();
    let bank = run_iid(mc.seed, mc.paths, 1, |rng, buf| {
        let x = sampler.draw(rng);
        buf[0] = divergence_sample(&out, x, root, rng);
    });
    Ok(bank.0[0].estimate())
}

fn taylor_coefficient(m: &Moments) -> Result<f64> {
    if m.mean.abs() > 1e-9 || (m.variance - 1.0).abs() > 1e-9 {
        return Err(invalid("Taylor expansions need zero-mean, unit-variance moments; standardize first"));
    }
    Ok(m.fourth * m.fourth - 6.0 * m.fourth - 2.0 * m.third * m.third + 15.0)
}

/// Cubic low-SNR expansion of the MMSE.
pub fn mmse_taylor(m: &Moments, snr: f64) -> Result<f64> {
    let c = taylor_coefficient(m)?;
    Ok(1.0 - snr + snr * snr - c / 6.0 * snr.powi(3))
}

/// Quartic low-SNR expansion of the mutual information.
pub fn mi_taylor(m: &Moments, snr: f64) -> Result<f64> {
    let c = taylor_coefficient(m)?;
    Ok(0.5 * snr - 0.25 * snr * snr + snr.powi(3) / 6.0 - c / 48.0 * snr.powi(4))
}

/// Markov chain `X → Z → Y` with `Z = X + σ N'`, Gaussian `X`:
/// `dI(X;Y)/dsnr = ½[mmse(Z|Y) - mmse(Z|Y,X)]`.
pub fn preprocessor_derivative(
    law_x: &InputLaw,
    noise_var: f64,
    snr: f64,
    fd_step: Option<f64>,
    quad: &QuadratureSpec,
) -> Result<Report> {
    let InputLaw::Gaussian { variance: vx, .. } = *law_x else {
        return Err(invalid("preprocessor check needs a Gaussian input law"));
    };
    if !(noise_var >= 0.0) || !(snr >= 0.0) {
        return Err(invalid("noise variance and snr must be >= 0"));
    }
    let mi = |s: f64| -> Result<f64> { Ok(0.5 * (1.0 + s * vx / (1.0 + s * noise_var)).ln()) };
    let h = fd_step.unwrap_or_else(|| default_fd_step(snr));
    let slope = derivative(mi, snr, h)?;

    let z_given_y_closed = (vx + noise_var) / (1.0 + snr * (vx + noise_var));
    let z_given_yx_closed = noise_var / (1.0 + snr * noise_var);
    let z_given_y = mmse_at(&InputLaw::gaussian(0.0, vx + noise_var)?, snr, quad)?;
    let z_given_yx = if noise_var == 0.0 {
        0.0
    } else {
        mmse_at(&InputLaw::gaussian(0.0, noise_var)?, snr, quad)?
    };
    let rhs = 0.5 * (z_given_y - z_given_yx);

    let mut report = Report::new("preprocessor");
    report.push(Check::close("mmse(Z|Y) engine vs closed form", z_given_y, z_given_y_closed, 1e-10));
    report.push(Check::close("mmse(Z|Y,X) engine vs closed form", z_given_yx, z_given_yx_closed, 1e-10));
    report.push(Check::close("dI/dsnr vs half MMSE difference", slope, rhs, 1e-8));
    Ok(report)
}

/// Exponential decay of the binary MMSE and `1/snr` decay of the Gaussian MMSE.
pub fn high_snr_decay(snr_grid: &[f64], quad: &QuadratureSpec) -> Result<Report> {
    if snr_grid.len() < 2 {
        return Err(invalid("decay fit needs at least two SNR points"));
    }
    let binary = snr_grid.iter().map(|&s| mmse_binary_closed(s)).collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("high_snr_decay");
    let positive = binary.iter().all(|&m| m > 0.0);
    let decreasing = binary.windows(2).all(|w| w[1] < w[0]);
    report.push(Check::close("binary mmse positive", positive as u8 as f64, 1.0, 0.0));
    report.push(Check::close("binary mmse decreasing", decreasing as u8 as f64, 1.0, 0.0));
    // Error-probability asymptotics: mmse ~ c snr^{-1/2} e^{-snr/2}. The
    // algebraic prefactor is divided out before fitting the exponent.
    let raw: Vec<f64> = binary.iter().map(|m| m.ln()).collect();
    let compensated: Vec<f64> = binary.iter().zip(snr_grid).map(|(m, s)| (m * s.sqrt()).ln()).collect();
    report.note(format!("uncompensated binary log-mmse slope {:.4}", fit_slope(snr_grid, &raw)));
    report.push(Check::within(
        "binary log-mmse exponent",
        fit_slope(snr_grid, &compensated),
        -0.55,
        -0.45,
    ));

    // Gaussian decay is algebraic; fit on the same grid pushed two decades out.
    let far: Vec<f64> = snr_grid.iter().map(|s| s * 100.0).collect();
    let gauss = InputLaw::standard_gaussian();
    let g = far.iter().map(|&s| mmse_at(&gauss, s, quad)).collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = far.iter().map(|s| s.ln()).collect();
    let ly: Vec<f64> = g.iter().map(|m| m.ln()).collect();
    report.push(Check::within("Gaussian log-log mmse slope", fit_slope(&lx, &ly), -1.05, -0.95));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inputs::MixtureComponent;

    fn mixture() -> InputLaw {
        InputLaw::mixture(vec![
            MixtureComponent::new(0.5, -1.0, 0.25),
            MixtureComponent::new(0.5, 1.0, 0.25),
        ])
        .unwrap()
    }

    fn ch(law: InputLaw, snr: f64) -> ScalarChannel {
        ScalarChannel::new(law, snr).unwrap()
    }

    #[test]
    fn q_moment_examples() {
        let g = ch(InputLaw::standard_gaussian(), 0.0);
        assert!((g.q_moment(0.0, 0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        for (y, s) in [(0.3, 2.0), (-1.2, 0.5), (4.0, 7.0)] {
            let b = ch(InputLaw::binary(), s);
            let r = s.sqrt();
            let expect =
                0.5 / (2.0 * PI).sqrt() * ((-(y - r) * (y - r) / 2.0).exp() - (-(y + r) * (y + r) / 2.0).exp());
            assert!((b.q_moment(y, 1) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn conditional_mean_closed_forms() {
        for s in [0.5, 3.0] {
            let b = ch(InputLaw::binary(), s);
            let g = ch(InputLaw::standard_gaussian(), s);
            for y in [-2.0, 0.1, 1.7, 30.0] {
                assert!((b.conditional_mean(y) - (s.sqrt() * y).tanh()).abs() < 1e-14);
                assert!((g.conditional_mean(y) - s.sqrt() * y / (1.0 + s)).abs() < 1e-14);
            }
        }
        let m = ch(mixture(), 0.0);
        assert!(m.conditional_mean(3.0).abs() < 1e-15);
        let a = ch(InputLaw::atoms(vec![0.0, 2.0], vec![0.25, 0.75]).unwrap(), 0.0);
        assert!((a.conditional_mean(-9.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn conditional_mean_survives_extreme_outputs() {
        let b = ch(InputLaw::binary(), 100.0);
        assert_eq!(b.conditional_mean(80.0), 1.0);
        assert_eq!(b.conditional_mean(-80.0), -1.0);
    }

    #[test]
    fn mmse_and_mi_examples() {
        assert!((ch(InputLaw::standard_gaussian(), 3.0).mmse().unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(ch(InputLaw::binary(), 0.0).mmse().unwrap(), 1.0);
        let b1 = ch(InputLaw::binary(), 1.0);
        assert!((b1.mmse().unwrap() - mmse_binary_closed(1.0).unwrap()).abs() < 1e-9);
        let g1 = ch(InputLaw::standard_gaussian(), 1.0);
        assert!((g1.mutual_information().unwrap() - 0.5 * LN_2).abs() < 1e-12);
        assert_eq!(ch(mixture(), 0.0).mutual_information().unwrap(), 0.0);
        let b64 = ch(InputLaw::binary(), 64.0).mutual_information().unwrap();
        assert!((b64 - LN_2).abs() < 1e-6);
    }

    #[test]
    fn binary_closed_forms() {
        assert_eq!(mmse_binary_closed(0.0).unwrap(), 1.0);
        assert_eq!(mi_binary_closed(0.0).unwrap(), 0.0);
        let mi = ch(InputLaw::binary(), 1.0).mutual_information().unwrap();
        assert!((mi - mi_binary_closed(1.0).unwrap()).abs() < 1e-9);
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = grid.iter().map(|&s| mi_binary_closed(s).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ln_cosh_is_accurate() {
        for w in [1e-8f64, 1e-3, 0.5, 0.999, 1.0, 3.0, 40.0, 800.0, -2.5] {
            let naive = if w.abs() < 300.0 { w.cosh().ln() } else { w.abs() - LN_2 };
            assert!((ln_cosh(w) - naive).abs() <= 1e-15 * naive.abs() + 4e-16, "w={w}");
        }
        assert!((ln_cosh(1e-8) - 0.5e-16).abs() < 1e-30);
    }

    #[test]
    fn immse_gaussian_and_binary() {
        let q = QuadratureSpec::default();
        let r = verify_immse(&InputLaw::standard_gaussian(), &[0.0, 0.5, 2.0], Some(1e-4), 1e-6, &q).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = verify_immse(&InputLaw::binary(), &[0.5, 1.0, 2.0, 5.0], Some(1e-4), 1e-6, &q).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn integral_form_trapezoid() {
        let q = QuadratureSpec::default();
        let law = InputLaw::binary();
        let direct = ch(law.clone(), 2.0).mutual_information().unwrap();
        let trap = mi_from_mmse_integral(&law, 2.0, IntegralRule::Trapezoid(400), &q).unwrap();
        assert!((direct - trap).abs() < 1e-5);
    }

    #[test]
    fn incremental_pair_algebra() {
        let p = incremental_decompose(1.0, 1.0).unwrap();
        assert_eq!((p.sigma1_sq, p.sigma2_sq), (0.5, 0.5));
        for (s, d) in [(0.3, 0.01), (2.0, 5.0), (10.0, 1e-6)] {
            let p = incremental_decompose(s, d).unwrap();
            assert!((p.sigma1_sq + p.sigma2_sq - 1.0 / s).abs() <= 2.0 * f64::EPSILON / s);
            assert!((p.sigma1_sq - 1.0 / (s + d)).abs() < 1e-15 / (s + d));
        }
        assert!(incremental_decompose(0.0, 1.0).is_err());
        assert!(incremental_decompose(1.0, 0.0).is_err());
    }

    #[test]
    fn innovation_noise_is_standard_and_uncorrelated() {
        let p = incremental_decompose(1.5, 0.5).unwrap();
        let mut rng = substream(9, 0);
        let n = 400_000;
        let (mut s_nn, mut s_cross) = (0.0, 0.0);
        for _ in 0..n {
            let n1: f64 = StandardNormal.sample(&mut rng);
            let n2: f64 = StandardNormal.sample(&mut rng);
            let w = p.innovation_noise(n1, n2);
            s_nn += w * w;
            s_cross += w * (p.sigma1_sq.sqrt() * n1 + p.sigma2_sq.sqrt() * n2);
        }
        let n = n as f64;
        assert!((s_nn / n - 1.0).abs() < 5.0 * (2.0 / n).sqrt());
        assert!((s_cross / n).abs() < 5.0 * (1.0 / (1.5 * n)).sqrt());
    }

    #[test]
    fn cascade_matches_direct_channel() {
        let p = incremental_decompose(2.0, 0.7).unwrap();
        let law = InputLaw::binary();
        let (_, y2) = p.sample_cascade(&law, 21, 20_000);
        let direct = p.sample_direct(&law, 21, 20_000);
        let (_, pval) = crate::stats::ks_two_sample(&y2, &direct);
        assert!(pval > 0.01, "KS p-value {pval}");
    }

    #[test]
    fn lemma1_examples() {
        let q = QuadratureSpec::default();
        let d = 1e-4;
        let ratio = ch(InputLaw::binary(), d).mutual_information().unwrap() / d;
        assert!((0.4995..=0.5).contains(&ratio), "{ratio}");
        let g = ch(InputLaw::standard_gaussian(), d).mutual_information().unwrap() / d;
        assert!((g - (1.0 + d).ln() / (2.0 * d)).abs() < 1e-9);
        let r = lemma1_low_snr(&InputLaw::binary(), &[1e-4, 1e-3, 1e-2], &q).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = lemma1_low_snr(&mixture(), &[1e-4, 1e-3, 1e-2], &q).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn fisher_routes() {
        let g = ch(InputLaw::standard_gaussian(), 1.0);
        assert!((g.fisher_information().unwrap() - 0.5).abs() < 1e-12);
        assert!((g.fisher_information_direct().unwrap() - 0.5).abs() < 1e-12);
        for law in [InputLaw::binary(), mixture()] {
            let c = ch(law, 0.0);
            assert_eq!(c.fisher_information().unwrap(), 1.0);
            assert!((c.fisher_information_direct().unwrap() - 1.0).abs() < 1e-10);
        }
        let b = ch(InputLaw::binary(), 2.0);
        let (a, d) = (b.fisher_information().unwrap(), b.fisher_information_direct().unwrap());
        assert!((a - d).abs() < 1e-8, "{a} vs {d}");
    }

    #[test]
    fn score_examples() {
        let s = 1.7;
        let g = ch(InputLaw::standard_gaussian(), s);
        for y in [-1.0, 0.4, 2.2] {
            assert!((g.score(y) + y / (1.0 + s)).abs() < 1e-14);
        }
        let z = ch(InputLaw::binary(), 0.0);
        assert!((z.score(0.8) + 0.8).abs() < 1e-15);
        let m = ch(mixture(), 2.0);
        for y in [-2.0, 0.3, 1.1] {
            let h = 1e-5;
            let fd = ((m.q_moment(y + h, 0)).ln() - (m.q_moment(y - h, 0)).ln()) / (2.0 * h);
            assert!((fd - m.score(y)).abs() < 1e-7);
        }
    }

    #[test]
    fn orthogonality_principle() {
        for law in [InputLaw::binary(), mixture()] {
            let r = ch(law, 1.3).orthogonality_residual().unwrap();
            assert!(r.abs() < 1e-8, "{r}");
        }
    }

    #[test]
    fn divergence_derivative_gaussian_closed_form() {
        // d/ds of ½[ln(1+s) + 1/(1+s) - 1] at s = 1.
        let exact = 0.5 * (0.5 - 0.25);
        let e = divergence_derivative(&InputLaw::standard_gaussian(), 0.0, 1.0, &McConfig::new(4, 400_000)).unwrap();
        assert!(e.z_score(exact) < 3.0, "{e:?}");
    }

    #[test]
    fn divergence_derivative_seeds_agree() {
        let law = InputLaw::binary();
        let a = divergence_derivative(&law, 1.0, 1.0, &McConfig::new(1, 200_000)).unwrap();
        let b = divergence_derivative(&law, 1.0, 1.0, &McConfig::new(2, 200_000)).unwrap();
        assert!((a.mean - b.mean).abs() < 3.0 * a.joint_se(&b));
        assert!(divergence_derivative(&law, 1.0, 0.0, &McConfig::new(1, 10)).is_err());
    }

    #[test]
    fn taylor_examples() {
        let b = InputLaw::binary().moments();
        let s = 0.01;
        let v = mmse_taylor(&b, s).unwrap();
        assert!((v - (1.0 - s + s * s - 5.0 / 3.0 * s.powi(3))).abs() < 1e-16);
        let g = InputLaw::standard_gaussian().moments();
        for s in [0.01, 0.1] {
            assert!((mmse_taylor(&g, s).unwrap() - (1.0 - s + s * s - s.powi(3))).abs() < 1e-16);
            // ½ ln(1+s) to fourth order.
            let series = 0.5 * (s - s * s / 2.0 + s.powi(3) / 3.0 - s.powi(4) / 4.0);
            assert!((mi_taylor(&g, s).unwrap() - series).abs() < 1e-16);
        }
        let shifted = InputLaw::gaussian(1.0, 2.0).unwrap().moments();
        assert!(mmse_taylor(&shifted, 0.1).is_err());
        assert!(mmse_taylor(&shifted.standardized(), 0.1).is_ok());
    }

    #[test]
    fn preprocessor_examples() {
        let q = QuadratureSpec::default();
        let x = InputLaw::standard_gaussian();
        let r = preprocessor_derivative(&x, 0.5, 1.0, None, &q).unwrap();
        assert!(r.passed(), "{r:?}");
        let rhs = r.checks[2].rhs;
        assert!((rhs - 0.5 * (1.5 / 2.5 - 0.5 / 1.5)).abs() < 1e-12);
        let r0 = preprocessor_derivative(&x, 0.0, 1.0, None, &q).unwrap();
        assert!(r0.passed());
        assert!((r0.checks[2].rhs - 0.5 * 0.5).abs() < 1e-12);
        assert!(preprocessor_derivative(&InputLaw::binary(), 0.5, 1.0, None, &q).is_err());
    }

    #[test]
    fn high_snr_decay_fits() {
        let grid: Vec<f64> = (0..=10).map(|i| 5.0 + i as f64).collect();
        let r = high_snr_decay(&grid, &QuadratureSpec::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
