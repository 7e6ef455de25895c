//! The vector channel `Y = H S X + N` with `S = diag(sqrt(snr_k))`.
//!
//! Gaussian inputs are handled in closed form. Finite atom sets are handled
//! by Monte Carlo over `(X, N)` with the posterior over atoms computed
//! exactly (log-sum-exp) for every sampled output.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::mc::{run_iid, Estimate, McConfig};
use crate::report::{Check, Report};
use crate::scalar::default_fd_step;

/// Largest accepted condition number of a Gaussian input covariance.
pub const MAX_CONDITION: f64 = 1e12;
/// Largest accepted number of atoms.
pub const MAX_ATOMS: usize = 1 << 16;

const LN_2PI_E: f64 = 2.837_877_066_409_345_3;

/// Input law of a vector channel.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorInput {
    /// Finitely many points in `R^K` (columns of `points`).
    Atoms { points: DMatrix<f64>, probs: Vec<f64> },
    Gaussian { mean: DVector<f64>, cov: DMatrix<f64> },
}

impl VectorInput {
    /// Atoms given as a list of points.
    pub fn atoms(points: &[Vec<f64>], probs: Vec<f64>) -> Result<Self> {
        let k = points.first().map(Vec::len).unwrap_or(0);
        if points.is_empty() || k == 0 {
            return Err(Error::InvalidLaw("atom set must be non-empty".into()));
        }
        if points.iter().any(|p| p.len() != k) {
            return Err(Error::DimensionMismatch("atoms have different dimensions".into()));
        }
        let m = DMatrix::from_fn(k, points.len(), |r, c| points[c][r]);
        let input = VectorInput::Atoms { points: m, probs };
        input.validate()?;
        Ok(input)
    }

    pub fn gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let input = VectorInput::Gaussian { mean, cov };
        input.validate()?;
        Ok(input)
    }

    /// Zero-mean Gaussian with covariance `cov`.
    pub fn centered_gaussian(cov: DMatrix<f64>) -> Result<Self> {
        Self::gaussian(DVector::zeros(cov.nrows()), cov)
    }

    /// Dimension `K` of the input.
    pub fn dim(&self) -> usize {
        match self {
            VectorInput::Atoms { points, .. } => points.nrows(),
            VectorInput::Gaussian { mean, .. } => mean.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VectorInput::Atoms { points, probs } => {
                if points.ncols() != probs.len() || points.ncols() == 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "{} atoms but {} probabilities",
                        points.ncols(),
                        probs.len()
                    )));
                }
                if points.ncols() > MAX_ATOMS {
                    return Err(Error::InvalidLaw(format!("at most {MAX_ATOMS} atoms supported")));
                }
                if points.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidLaw("atom coordinates must be finite".into()));
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return Err(Error::InvalidLaw("atom probabilities must be >= 0".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidLaw(format!("atom probabilities sum to {total}")));
                }
                Ok(())
            }
            VectorInput::Gaussian { mean, cov } => {
                if cov.nrows() != cov.ncols() || cov.nrows() != mean.len() || mean.is_empty() {
                    return Err(Error::DimensionMismatch(format!(
                        "mean of length {} with {}x{} covariance",
                        mean.len(),
                        cov.nrows(),
                        cov.ncols()
                    )));
                }
                if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidLaw("Gaussian parameters must be finite".into()));
                }
                let scale = cov.amax().max(1.0);
                if (cov - cov.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::InvalidLaw("covariance must be symmetric".into()));
                }
                let condition = condition_number(cov);
                if !(condition <= MAX_CONDITION) {
                    return Err(Error::DegenerateCovariance { condition });
                }
                Ok(())
            }
        }
    }

    /// Mean and covariance of the input.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        match self {
            VectorInput::Gaussian { mean, cov } => (mean.clone(), cov.clone()),
            VectorInput::Atoms { points, probs } => {
                let k = points.nrows();
                let mut mean = DVector::zeros(k);
                for (j, p) in probs.iter().enumerate() {
                    mean += points.column(j) * *p;
                }
                let mut cov = DMatrix::zeros(k, k);
                for (j, p) in probs.iter().enumerate() {
                    let d = points.column(j) - &mean;
                    cov += &d * d.transpose() * *p;
                }
                (mean, cov)
            }
        }
    }
}

/// `λ_max / λ_min` of a symmetric matrix (infinite when not positive definite).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn cholesky(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or(Error::DegenerateCovariance {
        condition: f64::INFINITY,
    })
}

fn log_det_spd(m: DMatrix<f64>) -> Result<f64> {
    let c = cholesky(m)?;
    Ok(2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Fisher information matrix estimate with entrywise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub j: DMatrix<f64>,
    pub se: DMatrix<f64>,
}

impl FisherMatrix {
    pub fn exact(j: DMatrix<f64>) -> Self {
        let se = DMatrix::zeros(j.nrows(), j.ncols());
        Self { j, se }
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.j - self.j.transpose()).amax()
    }

    pub fn trace(&self) -> f64 {
        self.j.trace()
    }

    /// Smallest and largest eigenvalue of the symmetrized estimate.
    pub fn eigen_range(&self) -> (f64, f64) {
        let sym = (&self.j + self.j.transpose()) * 0.5;
        let e = SymmetricEigen::new(sym).eigenvalues;
        (e.min(), e.max())
    }
}

/// The two Fisher routes and their per-draw difference.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherRoutes {
    /// `I - G Cov(X|Y) Gᵀ` averaged over `Y`.
    pub covariance: FisherMatrix,
    /// `E[s sᵀ]` with score `s(y) = G E[X|Y=y] - y`.
    pub score: FisherMatrix,
    /// Covariance route minus score route, draw by draw.
    pub difference: FisherMatrix,
}

/// Monte Carlo mutual information and MMSE for an atom input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomStatistics {
    pub mi: Estimate,
    /// MMSE in estimating `H X`.
    pub mmse: Estimate,
}

/// `Y = H diag(sqrt(snr)) X + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorChannelModel {
    h: DMatrix<f64>,
    input: VectorInput,
    snr: Vec<f64>,
}

impl VectorChannelModel {
    pub fn new(h: DMatrix<f64>, input: VectorInput, snr: Vec<f64>) -> Result<Self> {
        input.validate()?;
        if h.ncols() != input.dim() || h.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "H is {}x{} but the input has dimension {}",
                h.nrows(),
                h.ncols(),
                input.dim()
            )));
        }
        if snr.len() != input.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} SNRs for {} users",
                snr.len(),
                input.dim()
            )));
        }
        if snr.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(invalid("SNRs must be finite and >= 0"));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(invalid("H must be finite"));
        }
        Ok(Self { h, input, snr })
    }

    /// Every user at the same SNR.
    pub fn common(h: DMatrix<f64>, input: VectorInput, snr: f64) -> Result<Self> {
        let k = input.dim();
        Self::new(h, input, vec![snr; k])
    }

    pub fn with_snr(&self, snr: Vec<f64>) -> Result<Self> {
        Self::new(self.h.clone(), self.input.clone(), snr)
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn input(&self) -> &VectorInput {
        &self.input
    }

    pub fn snr(&self) -> &[f64] {
        &self.snr
    }

    /// Output dimension `L`.
    pub fn outputs(&self) -> usize {
        self.h.nrows()
    }

    /// Input dimension `K`.
    pub fn users(&self) -> usize {
        self.h.ncols()
    }

    /// The common SNR, if all users share one.
    pub fn common_snr(&self) -> Option<f64> {
        let s = self.snr[0];
        self.snr.iter().all(|v| *v == s).then_some(s)
    }

    /// `G = H diag(sqrt(snr_k))`.
    pub fn gain(&self) -> DMatrix<f64> {
        let mut g = self.h.clone();
        for (k, s) in self.snr.iter().enumerate() {
            g.column_mut(k).scale_mut(s.sqrt());
        }
        g
    }

    fn gaussian_parts(&self) -> Result<(&DVector<f64>, &DMatrix<f64>)> {
        match &self.input {
            VectorInput::Gaussian { mean, cov } => Ok((mean, cov)),
            VectorInput::Atoms { .. } => Err(invalid("operation needs a Gaussian input")),
        }
    }

    /// `½ log det(I + G Σ Gᵀ)`.
    pub fn gaussian_mi(&self) -> Result<f64> {
        let (_, cov) = self.gaussian_parts()?;
        let g = self.gain();
        let m = DMatrix::identity(self.outputs(), self.outputs()) + &g * cov * g.transpose();
        Ok(0.5 * log_det_spd(m)?)
    }

    /// `Σ - Σ Gᵀ (I + G Σ Gᵀ)⁻¹ G Σ`, the error covariance of `E[X|Y]`.
    pub fn gaussian_posterior_covariance(&self) -> Result<DMatrix<f64>> {
        let (_, cov) = self.gaussian_parts()?;
        let g = self.gain();
        let sg = cov * g.transpose();
        let m = DMatrix::identity(self.outputs(), self.outputs()) + &g * &sg;
        let solved = cholesky(m)?.solve(&sg.transpose());
        let p = cov - &sg * solved;
        Ok((&p + p.transpose()) * 0.5)
    }

    /// MMSE in estimating `H X`: `tr(H Cov(X|Y) Hᵀ)`.
    pub fn gaussian_mmse(&self) -> Result<f64> {
        let p = self.gaussian_posterior_covariance()?;
        Ok((&self.h * p * self.h.transpose()).trace())
    }

    /// `(I + G Σ Gᵀ)⁻¹`, the Fisher information of a Gaussian-input output.
    pub fn gaussian_fisher(&self) -> Result<DMatrix<f64>> {
        let (_, cov) = self.gaussian_parts()?;
        let g = self.gain();
        let l = self.outputs();
        let m = DMatrix::identity(l, l) + &g * cov * g.transpose();
        Ok(cholesky(m)?.inverse())
    }

    fn engine(&self) -> Result<AtomEngine> {
        AtomEngine::new(self)
    }

    /// Monte Carlo MI and MMSE for an atom input.
    pub fn atom_statistics(&self, mc: &McConfig) -> Result<AtomStatistics> {
        mc.check()?;
        let e = self.engine()?;
        let bank = run_iid(mc.seed, mc.paths, 2, |rng, out| {
            let mut s = e.scratch();
            e.draw(rng, &mut s);
            out[0] = e.mi_sample(&mut s);
            e.posterior_moments(&mut s);
            out[1] = e.hx_mmse(&s);
        });
        let est = bank.estimates();
        Ok(AtomStatistics {
            mi: est[0],
            mmse: est[1],
        })
    }

    pub fn atom_mi(&self, mc: &McConfig) -> Result<Estimate> {
        Ok(self.atom_statistics(mc)?.mi)
    }

    pub fn atom_mmse(&self, mc: &McConfig) -> Result<Estimate> {
        Ok(self.atom_statistics(mc)?.mmse)
    }

    /// Mutual information in nats: exact for Gaussian inputs, Monte Carlo for atoms.
    pub fn mutual_information(&self, mc: &McConfig) -> Result<Estimate> {
        match self.input {
            VectorInput::Gaussian { .. } => Ok(Estimate::exact(self.gaussian_mi()?)),
            VectorInput::Atoms { .. } => self.atom_mi(mc),
        }
    }

    /// MMSE in estimating `H X`.
    pub fn mmse(&self, mc: &McConfig) -> Result<Estimate> {
        match self.input {
            VectorInput::Gaussian { .. } => Ok(Estimate::exact(self.gaussian_mmse()?)),
            VectorInput::Atoms { .. } => self.atom_mmse(mc),
        }
    }

    /// Fisher information of `Y` by the covariance and score routes.
    pub fn fisher_matrix(&self, mc: &McConfig) -> Result<FisherRoutes> {
        if let VectorInput::Gaussian { .. } = self.input {
            let j = self.gaussian_fisher()?;
            let l = j.nrows();
            return Ok(FisherRoutes {
                covariance: FisherMatrix::exact(j.clone()),
                score: FisherMatrix::exact(j),
                difference: FisherMatrix::exact(DMatrix::zeros(l, l)),
            });
        }
        mc.check()?;
        let e = self.engine()?;
        let l = self.outputs();
        let ll = l * l;
        let bank = run_iid(mc.seed, mc.paths, 3 * ll, |rng, out| {
            let mut s = e.scratch();
            e.draw(rng, &mut s);
            e.lse(&mut s);
            e.posterior_moments(&mut s);
            let gcg = &e.g * &s.cov * e.g.transpose();
            let score = &e.g * &s.mean - &s.y;
            for c in 0..l {
                for r in 0..l {
                    let idx = r + c * l;
                    let a = if r == c { 1.0 } else { 0.0 } - gcg[(r, c)];
                    let b = score[r] * score[c];
                    out[idx] = a;
                    out[ll + idx] = b;
                    out[2 * ll + idx] = a - b;
                }
            }
        });
        let est = bank.estimates();
        let block = |offset: usize| FisherMatrix {
            j: DMatrix::from_fn(l, l, |r, c| est[offset + r + c * l].mean),
            se: DMatrix::from_fn(l, l, |r, c| est[offset + r + c * l].se),
        };
        Ok(FisherRoutes {
            covariance: block(0),
            score: block(ll),
            difference: block(2 * ll),
        })
    }

    /// `dI/dsnr = ½ mmse(HX)` at the common SNR.
    ///
    /// Gaussian inputs compare a central difference of the closed-form MI with
    /// `tolerance`. Atom inputs difference the per-draw information density at
    /// `snr ± δ` on common random numbers and require agreement within three
    /// standard errors of the paired difference.
    pub fn immse_check(&self, fd_step: Option<f64>, tolerance: f64, mc: &McConfig) -> Result<Report> {
        let snr = self
            .common_snr()
            .ok_or_else(|| invalid("the vector I-MMSE check needs a common SNR"))?;
        let h = fd_step.unwrap_or_else(|| default_fd_step(snr));
        if snr - h < 0.0 {
            return Err(invalid("snr must exceed the finite-difference step"));
        }
        let mut report = Report::new("vector_immse");
        let plus = self.with_snr(vec![snr + h; self.users()])?;
        let minus = self.with_snr(vec![snr - h; self.users()])?;
        match self.input {
            VectorInput::Gaussian { .. } => {
                let slope = (plus.gaussian_mi()? - minus.gaussian_mi()?) / (2.0 * h);
                let half = 0.5 * self.gaussian_mmse()?;
                report.push(Check::close(format!("dI/dsnr vs mmse/2 at snr={snr}"), slope, half, tolerance));
            }
            VectorInput::Atoms { .. } => {
                mc.check()?;
                let (e, ep, em) = (self.engine()?, plus.engine()?, minus.engine()?);
                let bank = run_iid(mc.seed, mc.paths, 3, |rng, out| {
                    let mut s = e.scratch();
                    let j = e.draw(rng, &mut s);
                    let noise = s.noise.clone();
                    let fd = (ep.mi_sample_with(j, &noise, &mut s) - em.mi_sample_with(j, &noise, &mut s)) / (2.0 * h);
                    e.mi_sample(&mut s);
                    e.posterior_moments(&mut s);
                    let half = 0.5 * e.hx_mmse(&s);
                    out.copy_from_slice(&[fd, half, fd - half]);
                });
                let est = bank.estimates();
                report.push(mc_check(format!("dI/dsnr vs mmse/2 at snr={snr}"), est[0], est[1], est[2], 3.0));
            }
        }
        Ok(report)
    }

    /// de Bruijn identity at `t = 1/snr`:
    /// `d/dt h(HX + sqrt(t) N) = ½ tr J(HX + sqrt(t) N)`, where
    /// `h(HX + sqrt(t) N) = I(X;Y) + (L/2) ln(2πe t)` and
    /// `J(HX + sqrt(t) N) = snr J(Y)`.
    pub fn de_bruijn_check(&self, fd_step: Option<f64>, tolerance: f64, mc: &McConfig) -> Result<Report> {
        let snr = self
            .common_snr()
            .ok_or_else(|| invalid("the de Bruijn check needs a common SNR"))?;
        if !(snr > 0.0) {
            return Err(invalid("the de Bruijn check needs snr > 0"));
        }
        let l = self.outputs() as f64;
        let t = 1.0 / snr;
        let dt = fd_step.unwrap_or(1e-4 * t);
        if t - dt <= 0.0 {
            return Err(invalid("finite-difference step too large for t = 1/snr"));
        }
        let at_t = |tt: f64| self.with_snr(vec![1.0 / tt; self.users()]);
        let (plus, minus) = (at_t(t + dt)?, at_t(t - dt)?);
        let mut report = Report::new("de_bruijn");
        match self.input {
            VectorInput::Gaussian { .. } => {
                let entropy = |m: &VectorChannelModel, tt: f64| -> Result<f64> {
                    Ok(m.gaussian_mi()? + 0.5 * l * (LN_2PI_E + tt.ln()))
                };
                let lhs = (entropy(&plus, t + dt)? - entropy(&minus, t - dt)?) / (2.0 * dt);
                let rhs = 0.5 * snr * self.gaussian_fisher()?.trace();
                report.push(Check::close(format!("dh/dt vs tr J / 2 at t={t}"), lhs, rhs, tolerance));
                // h(sqrt(t) N) dominates as t grows.
                let far = self.with_snr(vec![1e-9; self.users()])?.gaussian_mi()?;
                report.push(Check::close("entropy gap to noise at t=1e9", far, 0.0, 1e-6));
            }
            VectorInput::Atoms { .. } => {
                mc.check()?;
                let (e, ep, em) = (self.engine()?, plus.engine()?, minus.engine()?);
                let l_out = self.outputs();
                let bank = run_iid(mc.seed, mc.paths, 3, |rng, out| {
                    let mut s = e.scratch();
                    let j = e.draw(rng, &mut s);
                    let noise = s.noise.clone();
                    // y = sqrt(snr)(HX + sqrt(t) N) keeps the noise draw fixed across t.
                    let di = (ep.mi_sample_with(j, &noise, &mut s) - em.mi_sample_with(j, &noise, &mut s)) / (2.0 * dt);
                    let lhs = di + 0.5 * l / t;
                    e.mi_sample(&mut s);
                    e.posterior_moments(&mut s);
                    let gcg = (&e.g * &s.cov * e.g.transpose()).trace();
                    let rhs = 0.5 * snr * (l_out as f64 - gcg);
                    out.copy_from_slice(&[lhs, rhs, lhs - rhs]);
                });
                let est = bank.estimates();
                report.push(mc_check(format!("dh/dt vs tr J / 2 at t={t}"), est[0], est[1], est[2], 3.0));
            }
        }
        Ok(report)
    }

    /// Right-hand side of the per-user derivative,
    /// `½ Σ_i sqrt(snr_i/snr_k) [HᵀH]_{ki} E Cov(X_k, X_i | Y)`, for a given
    /// posterior covariance.
    fn multiuser_rhs(&self, k: usize, cov: &DMatrix<f64>) -> f64 {
        let hth = self.h.transpose() * &self.h;
        let sk = self.snr[k];
        (0..self.users())
            .map(|i| (self.snr[i] / sk).sqrt() * hth[(k, i)] * cov[(k, i)])
            .sum::<f64>()
            * 0.5
    }

    /// `∂I/∂snr_k` by a central difference in `snr_k` only, against the
    /// posterior-covariance expression.
    pub fn multiuser_derivative(
        &self,
        k: usize,
        fd_step: Option<f64>,
        tolerance: f64,
        mc: &McConfig,
    ) -> Result<Report> {
        let terms = self.multiuser_terms(fd_step, mc)?;
        let t = terms
            .get(k)
            .ok_or_else(|| Error::DimensionMismatch(format!("user {k} out of range")))?;
        let mut report = Report::new("multiuser");
        let name = format!("dI/dsnr_{k} vs covariance sum");
        report.push(match self.input {
            VectorInput::Gaussian { .. } => Check::close(name, t.lhs.mean, t.rhs.mean, tolerance),
            VectorInput::Atoms { .. } => mc_check(name, t.lhs, t.rhs, t.difference, 3.0),
        });
        Ok(report)
    }

    /// Both sides of the per-user derivative for every user, on shared draws.
    pub fn multiuser_terms(&self, fd_step: Option<f64>, mc: &McConfig) -> Result<Vec<MultiuserTerm>> {
        if self.snr.iter().any(|s| !(*s > 0.0)) {
            return Err(invalid("per-user derivatives need every snr_k > 0"));
        }
        let k_users = self.users();
        let steps: Vec<f64> = self
            .snr
            .iter()
            .map(|s| fd_step.unwrap_or_else(|| default_fd_step(*s)).min(0.5 * s))
            .collect();
        let shifted = |k: usize, sign: f64| {
            let mut v = self.snr.clone();
            v[k] += sign * steps[k];
            self.with_snr(v)
        };
        match self.input {
            VectorInput::Gaussian { .. } => {
                let cov = self.gaussian_posterior_covariance()?;
                (0..k_users)
                    .map(|k| {
                        let lhs = (shifted(k, 1.0)?.gaussian_mi()? - shifted(k, -1.0)?.gaussian_mi()?) / (2.0 * steps[k]);
                        let rhs = self.multiuser_rhs(k, &cov);
                        Ok(MultiuserTerm {
                            lhs: Estimate::exact(lhs),
                            rhs: Estimate::exact(rhs),
                            difference: Estimate::exact(lhs - rhs),
                        })
                    })
                    .collect()
            }
            VectorInput::Atoms { .. } => {
                mc.check()?;
                let e = self.engine()?;
                let pm = (0..k_users)
                    .map(|k| Ok((shifted(k, 1.0)?.engine()?, shifted(k, -1.0)?.engine()?)))
                    .collect::<Result<Vec<_>>>()?;
                let bank = run_iid(mc.seed, mc.paths, 3 * k_users, |rng, out| {
                    let mut s = e.scratch();
                    let j = e.draw(rng, &mut s);
                    let noise = s.noise.clone();
                    for (k, (ep, em)) in pm.iter().enumerate() {
                        out[3 * k] = (ep.mi_sample_with(j, &noise, &mut s) - em.mi_sample_with(j, &noise, &mut s))
                            / (2.0 * steps[k]);
                    }
                    e.mi_sample(&mut s);
                    e.posterior_moments(&mut s);
                    for k in 0..k_users {
                        let rhs = self.multiuser_rhs(k, &s.cov);
                        out[3 * k + 1] = rhs;
                        out[3 * k + 2] = out[3 * k] - rhs;
                    }
                });
                let est = bank.estimates();
                Ok((0..k_users)
                    .map(|k| MultiuserTerm {
                        lhs: est[3 * k],
                        rhs: est[3 * k + 1],
                        difference: est[3 * k + 2],
                    })
                    .collect())
            }
        }
    }

    /// Likelihood-ratio identities at `y` with `Z = G X` and
    /// `l(y) = q_0(y) / p_N(y)`:
    /// `∇ log l = E[Z|y]`, `Δ log l = E[|Z|²|y] - |E[Z|y]|²` and
    /// `Δ l / l = E[|Z|²|y]`. Derivatives are central differences with step
    /// `1e-4 (1 + |y|)`.
    pub fn likelihood_lemmas_check(&self, y: &[f64], tolerance: f64) -> Result<Report> {
        let l = self.outputs();
        if y.len() != l {
            return Err(Error::DimensionMismatch(format!("y has length {} but L = {l}", y.len())));
        }
        let y = DVector::from_column_slice(y);
        let g = self.gain();
        let (log_l, post_mean, post_second): (Box<dyn Fn(&DVector<f64>) -> f64>, DVector<f64>, f64) =
            match &self.input {
                VectorInput::Gaussian { mean, cov } => {
                    let m = &g * mean;
                    let c = &g * cov * g.transpose();
                    let chol = cholesky(DMatrix::identity(l, l) + &c)?;
                    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                    let inv = chol.inverse();
                    let zm = &m + &c * inv.clone() * (&y - &m);
                    let zcov = &c - &c * &inv * &c;
                    let second = zcov.trace() + zm.norm_squared();
                    let f = move |v: &DVector<f64>| {
                        let d = v - &m;
                        -0.5 * log_det - 0.5 * (d.transpose() * &inv * &d)[(0, 0)] + 0.5 * v.norm_squared()
                    };
                    (Box::new(f), zm, second)
                }
                VectorInput::Atoms { points, probs } => {
                    let z = &g * points;
                    let logp: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
                    let half_norm: Vec<f64> = z.column_iter().map(|c| 0.5 * c.norm_squared()).collect();
                    let lw: Vec<f64> = z
                        .column_iter()
                        .zip(&logp)
                        .zip(&half_norm)
                        .map(|((c, lp), hn)| lp + c.dot(&y) - hn)
                        .collect();
                    let lse = log_sum_exp(&lw);
                    let mut zm = DVector::zeros(l);
                    let mut second = 0.0;
                    for (j, w) in lw.iter().enumerate() {
                        let pj = (w - lse).exp();
                        zm += z.column(j) * pj;
                        second += pj * 2.0 * half_norm[j];
                    }
                    let f = move |v: &DVector<f64>| {
                        let w: Vec<f64> = z
                            .column_iter()
                            .zip(&logp)
                            .zip(&half_norm)
                            .map(|((c, lp), hn)| lp + c.dot(v) - hn)
                            .collect();
                        log_sum_exp(&w)
                    };
                    (Box::new(f), zm, second)
                }
            };

        let step = 1e-4 * (1.0 + y.norm());
        let base = log_l(&y);
        let mut grad = DVector::zeros(l);
        let mut lap_log = 0.0;
        let mut lap_ratio = 0.0;
        for d in 0..l {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[d] += step;
            ym[d] -= step;
            let (fp, fm) = (log_l(&yp), log_l(&ym));
            grad[d] = (fp - fm) / (2.0 * step);
            lap_log += (fp - 2.0 * base + fm) / (step * step);
            lap_ratio += ((fp - base).exp() - 2.0 + (fm - base).exp()) / (step * step);
        }

        let mut report = Report::new("likelihood_lemmas");
        for d in 0..l {
            report.push(Check::close(format!("d/dy_{d} log l vs E[Z_{d}|y]"), grad[d], post_mean[d], tolerance));
        }
        let cond_var = post_second - post_mean.norm_squared();
        report.push(Check::close("laplacian of log l vs tr Cov(Z|y)", lap_log, cond_var, tolerance));
        report.push(Check::close("laplacian of l over l vs E[|Z|^2|y]", lap_ratio, post_second, tolerance));
        Ok(report)
    }
}

/// Left side, right side and paired difference of a per-user derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiuserTerm {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub difference: Estimate,
}

/// Passes when the paired difference is within `z` standard errors of zero.
fn mc_check(name: String, lhs: Estimate, rhs: Estimate, diff: Estimate, z: f64) -> Check {
    let mut c = Check::close(name, lhs.mean, rhs.mean, z * diff.se);
    c.deviation = diff.mean.abs();
    c.pass = diff.mean.abs() <= z * diff.se;
    c
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Precomputed atom images `G x_j` for fast posterior evaluation.
struct AtomEngine {
    l: usize,
    k: usize,
    g: DMatrix<f64>,
    h: DMatrix<f64>,
    points: DMatrix<f64>,
    images: DMatrix<f64>,
    logp: Vec<f64>,
    cdf: Vec<f64>,
}

/// Per-draw working storage.
struct Scratch {
    noise: DVector<f64>,
    y: DVector<f64>,
    logw: Vec<f64>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl AtomEngine {
    fn new(model: &VectorChannelModel) -> Result<Self> {
        let VectorInput::Atoms { points, probs } = &model.input else {
            return Err(invalid("operation needs an atom input"));
        };
        let g = model.gain();
        let images = &g * points;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Ok(Self {
            l: model.outputs(),
            k: model.users(),
            h: model.h.clone(),
            g,
            points: points.clone(),
            images,
            logp: probs.iter().map(|p| p.ln()).collect(),
            cdf,
        })
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            noise: DVector::zeros(self.l),
            y: DVector::zeros(self.l),
            logw: vec![0.0; self.logp.len()],
            mean: DVector::zeros(self.k),
            cov: DMatrix::zeros(self.k, self.k),
        }
    }

    /// Draws an atom index and noise; leaves `y = G x_j + n` in the scratch.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, s: &mut Scratch) -> usize {
        let u: f64 = rng.random();
        let j = self.cdf.partition_point(|c| *c <= u);
        for v in s.noise.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        s.y.copy_from(&self.images.column(j));
        s.y += &s.noise;
        j
    }

    /// Fills log posterior weights for `s.y` and returns their log-sum-exp.
    fn lse(&self, s: &mut Scratch) -> f64 {
        for (j, w) in s.logw.iter_mut().enumerate() {
            let d2: f64 = self
                .images
                .column(j)
                .iter()
                .zip(s.y.iter())
                .map(|(a, b)| (b - a) * (b - a))
                .sum();
            *w = self.logp[j] - 0.5 * d2;
        }
        log_sum_exp(&s.logw)
    }

    /// Information density `log p(y|x_j) - log p(y)` at `y = G x_j + n` in
    /// the scratch.
    fn mi_sample(&self, s: &mut Scratch) -> f64 {
        let lse = self.lse(s);
        for w in s.logw.iter_mut() {
            *w -= lse;
        }
        -0.5 * s.noise.norm_squared() - lse
    }

    /// Same with an externally supplied noise vector (common random numbers).
    fn mi_sample_with(&self, j: usize, noise: &DVector<f64>, s: &mut Scratch) -> f64 {
        s.noise.copy_from(noise);
        s.y.copy_from(&self.images.column(j));
        s.y += noise;
        self.mi_sample(s)
    }

    /// Posterior mean and covariance of `X` from the log weights in the scratch.
    fn posterior_moments(&self, s: &mut Scratch) {
        let lse = log_sum_exp(&s.logw);
        s.mean.fill(0.0);
        s.cov.fill(0.0);
        for (j, w) in s.logw.iter().enumerate() {
            let p = (w - lse).exp();
            if p == 0.0 {
                continue;
            }
            let x = self.points.column(j);
            s.mean.axpy(p, &x, 1.0);
            s.cov.ger(p, &x, &x, 1.0);
        }
        s.cov.ger(-1.0, &s.mean, &s.mean, 1.0);
    }

    /// `tr(H Cov(X|y) Hᵀ)`.
    fn hx_mmse(&self, s: &Scratch) -> f64 {
        (&self.h * &s.cov * self.h.transpose()).trace().max(0.0)
    }
}
