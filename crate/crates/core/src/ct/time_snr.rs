//! Constant input observed in white noise: `dY = sqrt(snr) X dt + dW`.
//!
//! `Y_u / sqrt(u) = sqrt(u snr) X + N` is sufficient for `X` given the
//! record up to time `u`, so the causal MMSE at time `u` is the scalar MMSE
//! at `u snr`, and its time average over `[0, 1]` is the SNR average of the
//! scalar MMSE.

use rand_distr::{Distribution, StandardNormal};
use rand::Rng;

use crate::error::{invalid, Result};
use crate::inputs::{InputLaw, OutputDensity, QuadratureSpec, Sampler};
use crate::mc::{run_iid, McConfig};
use crate::report::{Check, Report};
use crate::scalar::{mi_from_mmse_integral, IntegralRule, ScalarChannel};

/// Monte Carlo causal error at time `u` (horizon 1), and at a uniformly
/// drawn time, against the scalar-channel oracles.
pub fn time_snr_transform_check(law: &InputLaw, snr: f64, u: f64, mc: &McConfig) -> Result<Report> {
    if !(snr > 0.0) || !(0.0..=1.0).contains(&u) {
        return Err(invalid("need snr > 0 and u in [0, 1]"));
    }
    mc.check()?;
    let sampler = Sampler::new(law);
    let root = snr.sqrt();
    let at_u = OutputDensity::new(law, u * snr)?;
    let prior_mean = law.mean();
    let bank = run_iid(mc.seed, mc.paths, 2, |rng, out| {
        let x = sampler.draw(rng);
        // W_u and, independently, a uniform time with its own W.
        let w: f64 = StandardNormal.sample(rng);
        out[0] = if u == 0.0 {
            (x - prior_mean).powi(2)
        } else {
            let stat = root * u.sqrt() * x + w;
            (x - at_u.posterior(stat).mean).powi(2)
        };
        let v: f64 = rng.random::<f64>();
        let wv: f64 = StandardNormal.sample(rng);
        let dv = OutputDensity::new(law, v * snr).expect("validated law");
        let stat = (v * snr).sqrt() * x + wv;
        out[1] = (x - dv.posterior(stat).mean).powi(2);
    });
    let est = bank.estimates();
    let quad = QuadratureSpec::default();
    let pointwise = ScalarChannel::new(law.clone(), u * snr)?.mmse()?;
    let averaged = 2.0 * mi_from_mmse_integral(law, snr, IntegralRule::Adaptive(1e-10), &quad)? / snr;

    let mut report = Report::new("time_snr_transform");
    report.push(Check::close(
        format!("causal error at u={u} vs scalar mmse at snr={}", u * snr),
        est[0].mean,
        pointwise,
        3.0 * est[0].se,
    ));
    report.push(Check::close(
        "time-averaged causal error vs SNR-averaged mmse",
        est[1].mean,
        averaged,
        3.0 * est[1].se,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_half_time() {
        let r = time_snr_transform_check(&InputLaw::binary(), 2.0, 0.5, &McConfig::new(3, 100_000)).unwrap();
        assert!(r.passed(), "{r:?}");
        let r0 = time_snr_transform_check(&InputLaw::binary(), 2.0, 0.0, &McConfig::new(3, 1000)).unwrap();
        assert_eq!(r0.checks[0].lhs, 1.0);
        assert_eq!(r0.checks[0].rhs, 1.0);
    }
}
