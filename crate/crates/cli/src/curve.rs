use std::f64::consts::LN_2;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use immse::ct::{spectral_quantities, telegraph_cmmse, telegraph_mmse, SpectrumModel, TelegraphModel};
use immse::dt::{block_mi, kalman_triple, ARProcess};
use immse::{Curve, InputLaw, QuadratureSpec, ScalarChannel};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::parse;
use crate::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Mi,
    Mmse,
    Cmmse,
    Pmmse,
    Fisher,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    pub quantity: Quantity,
    /// Scalar input law, e.g. `binary`, `gaussian:0,1`, `atoms:-1/0.5,1/0.5`,
    /// `mixture:0.5/-1/0.25,0.5/1/0.25`, `uniform:-1,1`.
    #[arg(long, conflicts_with_all = ["telegraph", "ar", "ou"])]
    pub input: Option<String>,
    /// Random telegraph input in continuous time, `nu=RATE`.
    #[arg(long, conflicts_with_all = ["ar", "ou"])]
    pub telegraph: Option<String>,
    /// Discrete-time AR(1) input, `a=COEF,n=LENGTH`.
    #[arg(long, conflicts_with = "ou")]
    pub ar: Option<String>,
    /// Ornstein–Uhlenbeck spectrum, `var=VARIANCE,beta=BANDWIDTH`.
    #[arg(long)]
    pub ou: Option<String>,
    /// Linear SNR: `START:STOP:STEP`, a comma list or one value.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    /// SNR in dB, same grammar as `--snr`.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Report mutual information in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum Source {
    Law(InputLaw),
    Telegraph(f64),
    Ar(ARProcess),
    Ou(SpectrumModel),
}

fn source(a: &CurveArgs) -> Result<Source, CliError> {
    if let Some(t) = &a.telegraph {
        let kv = parse::key_values(t, &["nu"])?;
        let nu = parse::lookup(&kv, "nu", 1.0);
        TelegraphModel::new(nu, 0.0)?;
        return Ok(Source::Telegraph(nu));
    }
    if let Some(s) = &a.ar {
        let kv = parse::key_values(s, &["a", "n"])?;
        let n = parse::lookup(&kv, "n", 50.0);
        if n.fract() != 0.0 || n < 1.0 {
            return Err(CliError::Usage("n must be a positive integer".into()));
        }
        return Ok(Source::Ar(ARProcess::new(parse::lookup(&kv, "a", 0.9), n as usize)?));
    }
    if let Some(s) = &a.ou {
        let kv = parse::key_values(s, &["var", "beta"])?;
        return Ok(Source::Ou(SpectrumModel::ou(parse::lookup(&kv, "var", 1.0), parse::lookup(&kv, "beta", 1.0))?));
    }
    Ok(Source::Law(parse::input_law(a.input.as_deref().unwrap_or("gaussian"))?))
}

struct Row {
    value: f64,
    method: &'static str,
    tol: f64,
}

fn unsupported(q: Quantity, what: &str) -> CliError {
    CliError::Usage(format!("{q:?} is not defined for {what}").to_lowercase())
}

fn evaluate(src: &Source, q: Quantity, snr: f64, quad: &QuadratureSpec) -> Result<Row, CliError> {
    let row = |value, method, tol| Ok(Row { value, method, tol });
    match src {
        Source::Law(law) => {
            let ch = ScalarChannel::with_quadrature(law.clone(), snr, *quad)?;
            match q {
                Quantity::Mi => row(ch.mutual_information()?, "quadrature", quad.adaptive_tol),
                Quantity::Mmse => row(ch.mmse()?, "quadrature", quad.adaptive_tol),
                Quantity::Fisher => row(ch.fisher_information()?, "quadrature", quad.adaptive_tol),
                _ => Err(unsupported(q, "a scalar input; use --telegraph, --ar or --ou")),
            }
        }
        Source::Telegraph(nu) => {
            let m = TelegraphModel::new(*nu, snr)?;
            match q {
                Quantity::Mmse => row(telegraph_mmse(&m)?, "f_integral", 1e-11),
                Quantity::Cmmse => row(telegraph_cmmse(&m)?, "f_integral", 1e-13),
                // Rate per unit time from the causal error.
                Quantity::Mi => row(0.5 * snr * telegraph_cmmse(&m)?, "duncan", 1e-13),
                _ => Err(unsupported(q, "the telegraph input")),
            }
        }
        Source::Ar(p) => {
            let n = p.n as f64;
            let t = kalman_triple(p, snr)?;
            match q {
                Quantity::Mi => row(block_mi(p, snr)? / n, "cholesky", 0.0),
                Quantity::Mmse => row(t.sum_mmse() / n, "kalman", 0.0),
                Quantity::Cmmse => row(t.sum_cmmse() / n, "kalman", 0.0),
                Quantity::Pmmse => row(t.sum_pmmse() / n, "kalman", 0.0),
                Quantity::Fisher => Err(unsupported(q, "the AR(1) input")),
            }
        }
        Source::Ou(s) => {
            let v = spectral_quantities(s, snr)?;
            match q {
                Quantity::Mi => row(v.mi_rate, "spectral", 1e-13),
                Quantity::Mmse => row(v.mmse, "spectral", 1e-13),
                Quantity::Cmmse => row(v.cmmse, "spectral", 1e-13),
                _ => Err(unsupported(q, "the OU spectrum")),
            }
        }
    }
}

pub fn run(a: &CurveArgs) -> Result<Outcome, CliError> {
    let src = source(a)?;
    let snrs = parse::snr_points(a.snr.as_deref(), a.snr_db.as_deref(), &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0])?;
    let quad = QuadratureSpec::default();
    let rows = snrs
        .par_iter()
        .map(|&s| evaluate(&src, a.quantity, s, &quad))
        .collect::<Result<Vec<_>, _>>()?;
    let (method, tol) = rows.first().map(|r| (r.method, r.tol)).unwrap_or(("none", 0.0));
    let input = a
        .telegraph
        .as_ref()
        .map(|t| format!("telegraph:{t}"))
        .or_else(|| a.ar.as_ref().map(|s| format!("ar:{s}")))
        .or_else(|| a.ou.as_ref().map(|s| format!("ou:{s}")))
        .unwrap_or_else(|| a.input.clone().unwrap_or_else(|| "gaussian".into()));
    let points = snrs.iter().zip(&rows).map(|(s, r)| (*s, r.value)).collect();
    let mut curve = Curve::new(format!("{:?}", a.quantity).to_lowercase(), input, method, tol, points)?;
    if a.bits && a.quantity == Quantity::Mi {
        curve = curve.map_values(|v| v / LN_2);
    }

    let sink: Box<dyn std::io::Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["snr", "value", "method", "tol"])?;
    for (s, v) in curve.points() {
        w.write_record([s.to_string(), v.to_string(), curve.method.clone(), format!("{:e}", curve.tolerance)])?;
    }
    w.flush()?;
    Ok(Outcome {
        passed: true,
        artifacts: a.out.iter().cloned().collect(),
        seeds: vec![],
        tolerances: vec![("quadrature", quad.adaptive_tol)],
    })
}
