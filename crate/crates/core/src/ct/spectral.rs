//! Stationary Gaussian inputs described by their power spectrum.
//!
//! * information rate `(1/4π) ∫ ln(1 + snr S(ω)) dω`
//! * noncausal MMSE `(1/2π) ∫ S / (1 + snr S) dω`
//! * causal MMSE `(1/(2π snr)) ∫ ln(1 + snr S(ω)) dω`

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::integrate_adaptive;
use crate::report::{Check, Report};

const SPECTRAL_TOL: f64 = 1e-13;

/// Rational spectrum of the Ornstein–Uhlenbeck family,
/// `S(ω) = 2βσ² / (β² + ω²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    pub variance: f64,
    pub beta: f64,
}

impl SpectrumModel {
    pub fn ou(variance: f64, beta: f64) -> Result<Self> {
        if !(variance > 0.0) || !(beta > 0.0) || !variance.is_finite() || !beta.is_finite() {
            return Err(invalid("OU spectrum needs variance > 0 and beta > 0"));
        }
        Ok(Self { variance, beta })
    }

    pub fn density(&self, omega: f64) -> f64 {
        2.0 * self.beta * self.variance / (self.beta * self.beta + omega * omega)
    }

    /// `∫_{-∞}^{∞} g(ω) dω` for even `g`, via `ω = β tan θ`.
    fn integrate_even<G: Fn(f64) -> f64>(&self, g: G, what: &'static str) -> Result<f64> {
        let b = self.beta;
        let h = |theta: f64| {
            let c = theta.cos();
            if c <= 0.0 {
                return 0.0;
            }
            g(b * theta.tan()) * b / (c * c)
        };
        let v = integrate_adaptive(h, 0.0, FRAC_PI_2, 0.0, SPECTRAL_TOL, what)?;
        Ok(2.0 * v)
    }

    /// `(1/2π) ∫ S dω`, which equals the variance.
    pub fn power(&self) -> Result<f64> {
        Ok(self.integrate_even(|w| self.density(w), "spectral power")? / (2.0 * PI))
    }

    /// Closed forms via contour integration:
    /// `((r - β)/2, σ²β/r, (r - β)/snr)` with `r = sqrt(β² + 2βσ² snr)`.
    pub fn closed_form(&self, snr: f64) -> SpectralQuantities {
        let (b, v) = (self.beta, self.variance);
        let r = (b * b + 2.0 * b * v * snr).sqrt();
        // r - β without cancellation at small snr.
        let gap = 2.0 * b * v * snr / (r + b);
        SpectralQuantities {
            mi_rate: 0.5 * gap,
            mmse: v * b / r,
            cmmse: if snr == 0.0 { v } else { gap / snr },
        }
    }
}

/// Information rate (nats per unit time), noncausal and causal MMSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralQuantities {
    pub mi_rate: f64,
    pub mmse: f64,
    pub cmmse: f64,
}

/// The three spectral formulas by frequency-domain quadrature.
pub fn spectral_quantities(s: &SpectrumModel, snr: f64) -> Result<SpectralQuantities> {
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(invalid("snr must be finite and >= 0"));
    }
    let mmse = s.integrate_even(|w| {
        let d = s.density(w);
        d / (1.0 + snr * d)
    }, "noncausal spectral MMSE")? / (2.0 * PI);
    if snr == 0.0 {
        return Ok(SpectralQuantities {
            mi_rate: 0.0,
            mmse,
            cmmse: mmse,
        });
    }
    let log_integral = s.integrate_even(|w| (snr * s.density(w)).ln_1p(), "spectral information rate")?;
    Ok(SpectralQuantities {
        mi_rate: log_integral / (4.0 * PI),
        mmse,
        cmmse: log_integral / (2.0 * PI * snr),
    })
}

/// Checks quadrature against closed forms, `snr·cmmse = 2·rate`,
/// `d rate/dsnr = mmse/2` and causal = SNR-averaged noncausal.
pub fn spectral_report(s: &SpectrumModel, snr: f64, tolerance: f64) -> Result<Report> {
    let q = spectral_quantities(s, snr)?;
    let c = s.closed_form(snr);
    let mut report = Report::new("spectral");
    report.push(Check::close("information rate vs closed form", q.mi_rate, c.mi_rate, tolerance));
    report.push(Check::close("noncausal MMSE vs closed form", q.mmse, c.mmse, tolerance));
    report.push(Check::close("causal MMSE vs closed form", q.cmmse, c.cmmse, tolerance));
    report.push(Check::close("snr * cmmse vs 2 * rate", snr * q.cmmse, 2.0 * q.mi_rate, tolerance));
    if snr > 0.0 {
        let h = 1e-4 * snr.max(1.0);
        let lo = (snr - h).max(0.0);
        let slope = (spectral_quantities(s, snr + h)?.mi_rate - spectral_quantities(s, lo)?.mi_rate) / (snr + h - lo);
        report.push(Check::close("d rate/dsnr vs mmse/2", slope, 0.5 * q.mmse, 1e-7));
        // ∫_0^snr σ²β/sqrt(β² + 2βσ²γ) dγ = r - β in closed form.
        let averaged = 2.0 * c.mi_rate / snr;
        report.push(Check::close("causal vs SNR-averaged noncausal", c.cmmse, averaged, 1e-10));
    }
    Ok(report)
}
