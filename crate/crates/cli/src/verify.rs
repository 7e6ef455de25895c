use std::path::PathBuf;

use clap::{Args, ValueEnum};
use immse::ct::{duncan_check, verify_thm7, FIntegralTable, TelegraphModel};
use immse::dt::{verify_corollary3, verify_thm9, ARProcess};
use immse::nalgebra::{DMatrix, DVector};
use immse::representations::{
    discrete_entropy, differential_entropy_via_mmse, entropy_via_mmse, nongaussianness, Mapping, TailPolicy,
};
use immse::scalar::{lemma1_low_snr, verify_immse};
use immse::{Check, InputLaw, McConfig, QuadratureSpec, Report, ScalarChannel, VectorChannelModel, VectorInput};
use serde::Serialize;

use crate::error::CliError;
use crate::parse;
use crate::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Suite {
    Immse,
    Duncan,
    Thm7,
    Debruijn,
    Corollary3,
    Thm9,
    Lemmas,
    Representations,
    #[value(name = "appendixE")]
    #[serde(rename = "appendixE")]
    AppendixE,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Scalar input law (see `curve --help`).
    #[arg(long, default_value = "binary")]
    pub input: String,
    /// Linear SNR grid; each suite has its own default.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Telegraph transition rate.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Argument of the f(i, j) integrals.
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub xi: f64,
    /// AR(1) coefficient.
    #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
    pub a: f64,
    /// AR(1) block length.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Finite-difference step; defaults scale with SNR.
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Override the suite's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Monte Carlo draws for suites that sample.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    suite: Suite,
    passed: bool,
    max_deviation: f64,
    checks: &'a [Check],
    notes: &'a [String],
}

fn vector_input(law: &InputLaw) -> Option<VectorInput> {
    match law {
        InputLaw::Gaussian { mean, variance } => {
            VectorInput::gaussian(DVector::from_element(1, *mean), DMatrix::from_element(1, 1, *variance)).ok()
        }
        InputLaw::DiscreteAtoms { values, probs } => {
            let pts: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
            VectorInput::atoms(&pts, probs.clone()).ok()
        }
        _ => None,
    }
}

fn default_tol(s: Suite) -> f64 {
    match s {
        Suite::Immse | Suite::Corollary3 => 1e-6,
        Suite::Duncan => 1e-8,
        Suite::Thm7 => 1e-4,
        Suite::Debruijn => 1e-7,
        Suite::Lemmas => 1e-6,
        Suite::Representations => 1e-3,
        Suite::AppendixE => 1e-8,
        Suite::Thm9 => 0.0,
    }
}

fn build(a: &VerifyArgs, tol: f64) -> Result<Report, CliError> {
    let quad = QuadratureSpec::default();
    let mc = McConfig::new(a.seed, a.paths);
    let law = || parse::input_law(&a.input);
    let snrs = |default: &[f64]| parse::snr_points(a.snr.as_deref(), a.snr_db.as_deref(), default);
    let mut report = Report::new(format!("{:?}", a.suite).to_lowercase());
    match a.suite {
        Suite::Immse => report.extend(verify_immse(&law()?, &snrs(&[0.1, 0.5, 1.0, 2.0, 5.0, 10.0])?, a.fd_step, tol, &quad)?),
        Suite::Duncan => {
            for s in snrs(&[0.5, 1.0, 3.16, 10.0])? {
                report.extend(duncan_check(&TelegraphModel::new(a.nu, s)?, tol)?);
            }
        }
        Suite::Thm7 => report.extend(verify_thm7(a.nu, &snrs(&[0.5, 1.0, 3.16, 10.0, 31.6])?, tol)?),
        Suite::Debruijn => {
            let law = law()?;
            for s in snrs(&[0.5, 1.0, 2.0])? {
                let ch = ScalarChannel::with_quadrature(law.clone(), s, quad)?;
                report.push(Check::close(
                    format!("Fisher information routes at snr={s}"),
                    ch.fisher_information()?,
                    ch.fisher_information_direct()?,
                    tol,
                ));
                match vector_input(&law) {
                    Some(input) => {
                        let m = VectorChannelModel::common(DMatrix::identity(1, 1), input, s)?;
                        report.extend(m.de_bruijn_check(a.fd_step, tol, &mc)?);
                    }
                    None => report.note("entropy derivative needs a Gaussian or atom input; Fisher routes only"),
                }
            }
        }
        Suite::Corollary3 => {
            let p = ARProcess::new(a.a, a.n)?;
            for s in snrs(&[1.0])? {
                report.extend(verify_corollary3(&p, s, a.fd_step, tol)?);
            }
        }
        Suite::Thm9 => {
            let p = ARProcess::new(a.a, a.n)?;
            for s in snrs(&[1.0])? {
                report.extend(verify_thm9(&p, s)?);
            }
            report.note("deviation is the slack of each inequality");
        }
        Suite::Lemmas => {
            let law = law()?;
            report.extend(lemma1_low_snr(&law, &[1e-2, 1e-3, 1e-4], &quad)?);
            if let Some(input) = vector_input(&law) {
                for s in snrs(&[1.0])? {
                    let m = VectorChannelModel::common(DMatrix::identity(1, 1), input.clone(), s)?;
                    report.extend(m.likelihood_lemmas_check(&[0.7], tol)?);
                }
            }
        }
        Suite::Representations => {
            let law = law()?;
            match &law {
                InputLaw::DiscreteAtoms { .. } => {
                    let h = entropy_via_mmse(&law, Mapping::Identity, &TailPolicy::discrete())?;
                    report.push(Check::close("entropy via MMSE vs -sum p ln p", h.value, discrete_entropy(&law)?, tol));
                }
                InputLaw::Gaussian { .. } => {
                    let d = nongaussianness(&law, &TailPolicy::density())?;
                    report.push(Check::close("non-Gaussianness of a Gaussian", d.value, 0.0, 1e-9));
                }
                _ => {
                    let d = nongaussianness(&law, &TailPolicy::density())?;
                    report.push(Check::at_most("non-Gaussianness >= 0", 0.0, d.value, 1e-9));
                    let h = differential_entropy_via_mmse(&law, &TailPolicy::density())?;
                    report.note(format!("differential entropy via MMSE: {h}"));
                    report.note(format!("gamma = exp(-D): {}", (-d.value).exp()));
                }
            }
        }
        Suite::AppendixE => {
            report.extend(FIntegralTable::new(a.xi)?.recurrence_report(a.fd_step.unwrap_or(1e-5), tol)?);
        }
    }
    Ok(report)
}

pub fn run(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let tol = a.tol.unwrap_or(default_tol(a.suite));
    let report = build(a, tol)?;
    let out = VerifyOutput {
        suite: a.suite,
        passed: report.passed(),
        max_deviation: report.max_deviation(),
        checks: &report.checks,
        notes: &report.notes,
    };
    let text = serde_json::to_string_pretty(&out)? + "\n";
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::Write::write_all(&mut std::io::stdout().lock(), text.as_bytes())?,
    }
    let samples = matches!(a.suite, Suite::Debruijn);
    Ok(Outcome {
        passed: report.passed(),
        artifacts: a.out.iter().cloned().collect(),
        seeds: if samples { vec![a.seed] } else { vec![] },
        tolerances: vec![("check", tol)],
    })
}
