//! Closed forms for the random telegraph input (±1, flip rate `ν`).
//!
//! Both MMSEs are ratios of the integrals
//! `f(i, j) = ∫_1^∞ u^{i/2} (u-1)^{j/2} e^{ξu} du` with `ξ = -2ν/snr`.
//! Everything below works with `e^{-ξ} f(i, j)` so that very negative `ξ`
//! (low SNR) does not underflow.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::integrate_adaptive;
use crate::report::{Check, Report};

/// Relative tolerance for the one-dimensional `f` integrals.
const F_TOL: f64 = 1e-13;
/// `e^{-40}` is where the integrands are truncated.
const TAIL_EXPONENT: f64 = 40.0;

/// Stationary ±1 Markov input with transition rate `nu`, observed at `snr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelegraphModel {
    pub nu: f64,
    pub snr: f64,
}

impl TelegraphModel {
    pub fn new(nu: f64, snr: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(invalid("telegraph transition rate must be > 0"));
        }
        if !(snr >= 0.0) || !snr.is_finite() {
            return Err(invalid("snr must be finite and >= 0"));
        }
        Ok(Self { nu, snr })
    }

    pub fn at_snr(&self, snr: f64) -> Result<Self> {
        Self::new(self.nu, snr)
    }

    /// `ξ = -2ν/snr` (`-∞` at zero SNR).
    pub fn xi(&self) -> f64 {
        -2.0 * self.nu / self.snr
    }
}

fn check_args(i: i32, j: i32, xi: f64) -> Result<()> {
    if i < -1 || j < -1 {
        return Err(invalid("f(i, j) needs i, j >= -1"));
    }
    if !(xi < 0.0) || !xi.is_finite() {
        return Err(invalid("f(i, j) needs a finite xi < 0"));
    }
    Ok(())
}

/// `e^{-ξ} f(i, j)`.
///
/// With `u = 1 + v²` the integrand becomes
/// `2 (1+v²)^{i/2} v^{j+1} e^{ξv²}`, which is smooth on `[0, ∞)` for `j >= -1`.
pub fn f_integral_scaled(i: i32, j: i32, xi: f64) -> Result<f64> {
    check_args(i, j, xi)?;
    let upper = (TAIL_EXPONENT / -xi).sqrt();
    let (hi, hj) = (0.5 * i as f64, (j + 1) as f64);
    let integrand = |v: f64| {
        let v2 = v * v;
        2.0 * (1.0 + v2).powf(hi) * v.powf(hj) * (xi * v2).exp()
    };
    // A coarse first split keeps the bulk and the tail in separate panels.
    let mid = (1.0 / -xi).sqrt().min(upper);
    let a = integrate_adaptive(integrand, 0.0, mid, 0.0, F_TOL, "telegraph f-integral")?;
    let b = integrate_adaptive(integrand, mid, upper, 0.0, F_TOL, "telegraph f-integral")?;
    Ok(a + b)
}

/// `f(i, j) = ∫_1^∞ u^{i/2} (u-1)^{j/2} e^{ξu} du`.
pub fn f_integral(i: i32, j: i32, xi: f64) -> Result<f64> {
    Ok(xi.exp() * f_integral_scaled(i, j, xi)?)
}

/// `f(i, j)` on `i, j ∈ {-1, 1, 3}` at one `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FIntegralTable {
    pub xi: f64,
    /// `values[a][b] = f(2a - 1, 2b - 1)`.
    pub values: [[f64; 3]; 3],
}

impl FIntegralTable {
    pub fn new(xi: f64) -> Result<Self> {
        let mut values = [[0.0; 3]; 3];
        for (a, row) in values.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = f_integral(2 * a as i32 - 1, 2 * b as i32 - 1, xi)?;
            }
        }
        Ok(Self { xi, values })
    }

    /// `f(i, j)` for odd `i, j` in `-1..=3`.
    pub fn get(&self, i: i32, j: i32) -> f64 {
        self.values[((i + 1) / 2) as usize][((j + 1) / 2) as usize]
    }

    /// Relative residuals of the three recurrences, checked against `tol`.
    ///
    /// * `f(i, j) = f(i+2, j) - f(i, j+2)`
    /// * `∂f(i, j)/∂ξ = f(i+2, j)` (central difference with step `fd_step`)
    /// * `-ξ f(i, j) = (i/2) f(i-2, j) + (j/2) f(i, j-2)`
    pub fn recurrence_report(&self, fd_step: f64, tol: f64) -> Result<Report> {
        let xi = self.xi;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        let mut report = Report::new("f_recurrences");
        let mut push = |name: String, a: f64, b: f64, t: f64| {
            let mut c = Check::close(name, a, b, t);
            c.deviation = rel(a, b);
            c.pass = c.deviation <= t;
            report.push(c);
        };
        for i in [-1, 1] {
            for j in [-1, 1] {
                push(
                    format!("f({i},{j}) = f({},{j}) - f({i},{}) at xi={xi}", i + 2, j + 2),
                    self.get(i, j),
                    self.get(i + 2, j) - self.get(i, j + 2),
                    tol,
                );
            }
        }
        for i in [-1, 1] {
            for j in [-1, 1, 3] {
                let fd = (f_integral(i, j, xi + fd_step)? - f_integral(i, j, xi - fd_step)?) / (2.0 * fd_step);
                let exact = if j == 3 { f_integral(i + 2, j, xi)? } else { self.get(i + 2, j) };
                push(format!("df({i},{j})/dxi = f({},{j}) at xi={xi}", i + 2), fd, exact, tol);
            }
        }
        for i in [1, 3] {
            for j in [1, 3] {
                push(
                    format!("-xi f({i},{j}) = ({i}/2) f({},{j}) + ({j}/2) f({i},{}) at xi={xi}", i - 2, j - 2),
                    -xi * self.get(i, j),
                    0.5 * i as f64 * self.get(i - 2, j) + 0.5 * j as f64 * self.get(i, j - 2),
                    tol,
                );
            }
        }
        Ok(report)
    }
}

/// Causal (filtering) MMSE `f(-1,-1) / f(1,-1)`.
pub fn telegraph_cmmse(m: &TelegraphModel) -> Result<f64> {
    if m.snr == 0.0 {
        return Ok(1.0);
    }
    let xi = m.xi();
    Ok(f_integral_scaled(-1, -1, xi)? / f_integral_scaled(1, -1, xi)?)
}

/// Noncausal (smoothing) MMSE at the default tolerance.
pub fn telegraph_mmse(m: &TelegraphModel) -> Result<f64> {
    telegraph_mmse_with_tol(m, 1e-11)
}

/// Noncausal MMSE as
/// `f(1,-1)^{-2} ∫∫_{t,u≥1} e^{ξ(t+u)} / (t+u-1) · sqrt(tu / ((t-1)(u-1))) dt du`,
/// evaluated with `t = 1 + a²`, `u = 1 + b²`.
pub fn telegraph_mmse_with_tol(m: &TelegraphModel, tol: f64) -> Result<f64> {
    if m.snr == 0.0 {
        return Ok(1.0);
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be > 0"));
    }
    let xi = m.xi();
    let upper = (TAIL_EXPONENT / -xi).sqrt();
    let mid = (1.0 / -xi).sqrt();
    // e^{2ξ} has been divided out of numerator and denominator alike.
    let inner = |a: f64| -> f64 {
        let a2 = a * a;
        let ea = (xi * a2).exp();
        let g = |b: f64| {
            let b2 = b * b;
            4.0 * (xi * b2).exp() / (1.0 + a2 + b2) * ((1.0 + a2) * (1.0 + b2)).sqrt()
        };
        let lo = integrate_adaptive(g, 0.0, mid, 0.0, tol, "telegraph smoothing integral");
        let hi = integrate_adaptive(g, mid, upper, 0.0, tol, "telegraph smoothing integral");
        match (lo, hi) {
            (Ok(x), Ok(y)) => ea * (x + y),
            _ => f64::NAN,
        }
    };
    let num = integrate_adaptive(inner, 0.0, mid, 0.0, tol, "telegraph smoothing integral")?
        + integrate_adaptive(inner, mid, upper, 0.0, tol, "telegraph smoothing integral")?;
    if !num.is_finite() {
        return Err(crate::Error::NonConvergence {
            what: "telegraph smoothing integral",
            change: f64::NAN,
            target: tol,
        });
    }
    let den = f_integral_scaled(1, -1, xi)?;
    Ok(num / (den * den))
}

/// `d/dsnr [snr · cmmse]` through the `f` recurrences:
/// `[f(-1,-1) f(1,-1) - ξ f(1,-1)² + ξ f(-1,-1) f(3,-1)] / f(1,-1)²`.
///
/// Equal to the noncausal MMSE when causal MMSE is the SNR-average of it.
pub fn telegraph_snr_cmmse_derivative(m: &TelegraphModel) -> Result<f64> {
    if m.snr == 0.0 {
        return Ok(1.0);
    }
    let xi = m.xi();
    let f = f_integral_scaled(-1, -1, xi)?;
    let g = f_integral_scaled(1, -1, xi)?;
    let h = f_integral_scaled(3, -1, xi)?;
    Ok((f * g - xi * g * g + xi * f * h) / (g * g))
}

/// `(1/snr) ∫_0^snr mmse(γ) dγ` by adaptive quadrature.
pub fn telegraph_averaged_mmse(nu: f64, snr: f64, tol: f64) -> Result<f64> {
    if snr == 0.0 {
        return Ok(1.0);
    }
    let m = TelegraphModel::new(nu, snr)?;
    let integral = integrate_adaptive(
        |g| {
            if g == 0.0 {
                return 1.0;
            }
            telegraph_mmse(&TelegraphModel { nu: m.nu, snr: g }).unwrap_or(f64::NAN)
        },
        0.0,
        snr,
        tol * snr,
        0.0,
        "SNR average of the telegraph MMSE",
    )?;
    if !integral.is_finite() {
        return Err(crate::Error::NonConvergence {
            what: "SNR average of the telegraph MMSE",
            change: f64::NAN,
            target: tol,
        });
    }
    Ok(integral / snr)
}

/// Causal MMSE against the SNR-average of the noncausal MMSE on a grid.
pub fn verify_thm7(nu: f64, snr_grid: &[f64], tolerance: f64) -> Result<Report> {
    let mut report = Report::new("causal_vs_averaged_noncausal");
    report.note(
        "causal MMSE at snr equals E[mmse(Γ)] with Γ uniform on [0, snr]; \
         right-hand side is the SNR average of the noncausal MMSE",
    );
    for &s in snr_grid {
        let m = TelegraphModel::new(nu, s)?;
        let lhs = telegraph_cmmse(&m)?;
        let rhs = telegraph_averaged_mmse(nu, s, 1e-9)?;
        report.push(Check::close(format!("cmmse vs averaged mmse at snr={s}"), lhs, rhs, tolerance));
    }
    Ok(report)
}

/// Duncan and the integral I-MMSE form computed independently:
/// `(snr/2) cmmse` against `½ ∫_0^snr mmse`.
pub fn duncan_check(m: &TelegraphModel, tolerance: f64) -> Result<Report> {
    let mut report = Report::new("duncan");
    let a = 0.5 * m.snr * telegraph_cmmse(m)?;
    let b = 0.5 * m.snr * telegraph_averaged_mmse(m.nu, m.snr, 1e-9)?;
    report.push(Check::close(format!("mutual information rate at snr={}", m.snr), a, b, tolerance));
    Ok(report)
}
