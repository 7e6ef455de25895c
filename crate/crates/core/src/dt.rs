//! Discrete-time channel `Y_i = sqrt(snr) X_i + N_i` with a stationary
//! Gauss–Markov (AR(1)) input of unit variance.
//!
//! Prediction, filtering and smoothing MMSEs come from the scalar Kalman
//! recursions and a fixed-interval (Rauch–Tung–Striebel) smoother.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::report::{Check, Report};
use crate::scalar::default_fd_step;

/// `X_{i+1} = a X_i + sqrt(1 - a²) W_i`, `X_1 ~ N(0, 1)`, for `i = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ARProcess {
    pub a: f64,
    pub n: usize,
}

impl ARProcess {
    pub fn new(a: f64, n: usize) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(invalid("AR(1) coefficient must satisfy |a| < 1"));
        }
        if n == 0 {
            return Err(invalid("horizon n must be >= 1"));
        }
        Ok(Self { a, n })
    }

    /// Toeplitz covariance `Σ_ij = a^{|i-j|}`.
    pub fn covariance(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.a.powi((i as i32 - j as i32).abs()))
    }
}

/// Per-index prediction, filtering and smoothing MMSEs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmseTriple {
    pub pmmse: Vec<f64>,
    pub cmmse: Vec<f64>,
    pub mmse: Vec<f64>,
}

impl MmseTriple {
    pub fn sum_pmmse(&self) -> f64 {
        self.pmmse.iter().sum()
    }

    pub fn sum_cmmse(&self) -> f64 {
        self.cmmse.iter().sum()
    }

    pub fn sum_mmse(&self) -> f64 {
        self.mmse.iter().sum()
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(invalid("snr must be finite and >= 0"));
    }
    Ok(())
}

/// Kalman filter, one-step predictor and RTS smoother error variances.
pub fn kalman_triple(p: &ARProcess, snr: f64) -> Result<MmseTriple> {
    check_snr(snr)?;
    let (a, n) = (p.a, p.n);
    let q = 1.0 - a * a;
    let mut pmmse = Vec::with_capacity(n);
    let mut cmmse = Vec::with_capacity(n);
    let mut pred = 1.0;
    for _ in 0..n {
        pmmse.push(pred);
        let filt = pred / (1.0 + snr * pred);
        cmmse.push(filt);
        pred = a * a * filt + q;
    }
    let mut mmse = vec![0.0; n];
    mmse[n - 1] = cmmse[n - 1];
    for i in (0..n - 1).rev() {
        let gain = a * cmmse[i] / pmmse[i + 1];
        mmse[i] = cmmse[i] + gain * gain * (mmse[i + 1] - pmmse[i + 1]);
    }
    Ok(MmseTriple { pmmse, cmmse, mmse })
}

/// `½ log det(I + snr Σ)` by Cholesky.
pub fn block_mi(p: &ARProcess, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let m = DMatrix::identity(p.n, p.n) + p.covariance() * snr;
    let c = Cholesky::new(m).ok_or(Error::DegenerateCovariance {
        condition: f64::INFINITY,
    })?;
    Ok(c.l_dirty().diagonal().iter().map(|d| d.ln()).sum())
}

/// `½ Σ ln(1 + snr λ_i(Σ))`.
pub fn block_mi_eigen(p: &ARProcess, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let eig = SymmetricEigen::new(p.covariance()).eigenvalues;
    Ok(eig.iter().map(|l| 0.5 * (snr * l).ln_1p()).sum())
}

/// `½ Σ ln(1 + snr pmmse(i))`, the chain rule over innovations.
pub fn block_mi_innovations(p: &ARProcess, snr: f64) -> Result<f64> {
    let t = kalman_triple(p, snr)?;
    Ok(t.pmmse.iter().map(|v| 0.5 * (snr * v).ln_1p()).sum())
}

/// Smoother MMSEs by dense conditioning: `diag(Σ - snr Σ (I + snr Σ)⁻¹ Σ)`.
pub fn dense_smoother_mmse(p: &ARProcess, snr: f64) -> Result<Vec<f64>> {
    check_snr(snr)?;
    let s = p.covariance();
    let m = DMatrix::identity(p.n, p.n) + &s * snr;
    let c = Cholesky::new(m).ok_or(Error::DegenerateCovariance {
        condition: f64::INFINITY,
    })?;
    let post = &s - &s * c.solve(&s) * snr;
    Ok(post.diagonal().iter().copied().collect())
}

/// `dI/dsnr` by central difference against `½ Σ mmse(i)`.
pub fn verify_corollary3(p: &ARProcess, snr: f64, fd_step: Option<f64>, tolerance: f64) -> Result<Report> {
    let h = fd_step.unwrap_or_else(|| default_fd_step(snr));
    let slope = if snr - h < 0.0 {
        (-3.0 * block_mi(p, snr)? + 4.0 * block_mi(p, snr + h)? - block_mi(p, snr + 2.0 * h)?) / (2.0 * h)
    } else {
        (block_mi(p, snr + h)? - block_mi(p, snr - h)?) / (2.0 * h)
    };
    let half = 0.5 * kalman_triple(p, snr)?.sum_mmse();
    let mut report = Report::new("corollary3");
    report.push(Check::close(
        format!("dI/dsnr vs half smoothing MMSE sum (a={}, n={}, snr={snr})", p.a, p.n),
        slope,
        half,
        tolerance,
    ));
    Ok(report)
}

/// `(snr/2) Σ cmmse <= I <= (snr/2) Σ pmmse`; deviations are the slacks.
pub fn verify_thm9(p: &ARProcess, snr: f64) -> Result<Report> {
    let t = kalman_triple(p, snr)?;
    let mi = block_mi(p, snr)?;
    let lower = 0.5 * snr * t.sum_cmmse();
    let upper = 0.5 * snr * t.sum_pmmse();
    let mut report = Report::new("thm9");
    let tag = format!("(a={}, n={}, snr={snr})", p.a, p.n);
    report.push(Check::at_most(format!("filtering bound {tag}"), lower, mi, 0.0));
    report.push(Check::at_most(format!("prediction bound {tag}"), mi, upper, 0.0));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memoryless_cases() {
        let p = ARProcess::new(0.0, 1).unwrap();
        let t = kalman_triple(&p, 2.0).unwrap();
        assert_eq!(t.pmmse, vec![1.0]);
        assert!((t.cmmse[0] - 1.0 / 3.0).abs() < 1e-15 && (t.mmse[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((block_mi(&p, 2.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-15);
        let iid = ARProcess::new(0.0, 7).unwrap();
        assert!((block_mi(&iid, 1.5).unwrap() - 3.5 * 2.5f64.ln()).abs() < 1e-13);
        let z = kalman_triple(&ARProcess::new(0.6, 5).unwrap(), 0.0).unwrap();
        assert!(z.pmmse.iter().chain(&z.cmmse).chain(&z.mmse).all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn smoother_matches_dense_conditioning() {
        let p = ARProcess::new(0.9, 50).unwrap();
        let t = kalman_triple(&p, 1.0).unwrap();
        let dense = dense_smoother_mmse(&p, 1.0).unwrap();
        for (a, b) in t.mmse.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn mi_routes_agree() {
        for (a, n, s) in [(0.9, 50, 1.0), (-0.5, 12, 3.0), (0.2, 3, 0.1)] {
            let p = ARProcess::new(a, n).unwrap();
            let det = block_mi(&p, s).unwrap();
            assert!((det - block_mi_eigen(&p, s).unwrap()).abs() < 1e-10);
            assert!((det - block_mi_innovations(&p, s).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn corollary3_and_symbolic_n2() {
        let p = ARProcess::new(0.9, 50).unwrap();
        for s in [0.5, 1.0, 2.0] {
            assert!(verify_corollary3(&p, s, None, 1e-6).unwrap().passed());
        }
        let (a, s) = (0.7, 1.3);
        let p2 = ARProcess::new(a, 2).unwrap();
        let symbolic = ((1.0 + s) - s * a * a) / ((1.0 + s).powi(2) - s * s * a * a);
        let half = 0.5 * kalman_triple(&p2, s).unwrap().sum_mmse();
        assert!((symbolic - half).abs() < 1e-14);
    }

    #[test]
    fn thm9_chain() {
        let r = verify_thm9(&ARProcess::new(0.9, 50).unwrap(), 1.0).unwrap();
        assert!(r.passed() && r.checks.iter().all(|c| c.deviation > 0.0), "{r:?}");
        let (n, s) = (4usize, 0.8);
        let r = verify_thm9(&ARProcess::new(0.0, n).unwrap(), s).unwrap();
        assert!((r.checks[0].lhs - 0.5 * s * n as f64 / (1.0 + s)).abs() < 1e-14);
        assert!((r.checks[1].rhs - 0.5 * s * n as f64).abs() < 1e-14);
    }

    #[test]
    fn ordering_and_reversibility() {
        let p = ARProcess::new(0.8, 21).unwrap();
        let t = kalman_triple(&p, 2.0).unwrap();
        for i in 0..p.n {
            assert!(t.mmse[i] <= t.cmmse[i] + 1e-15 && t.cmmse[i] <= t.pmmse[i] + 1e-15);
            assert!((t.mmse[i] - t.mmse[p.n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ARProcess::new(1.0, 3).is_err());
        assert!(ARProcess::new(0.5, 0).is_err());
        assert!(kalman_triple(&ARProcess::new(0.5, 3).unwrap(), -1.0).is_err());
    }
}
