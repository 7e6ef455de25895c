use std::path::PathBuf;

use clap::{Args, ValueEnum};
use immse::ct::time_snr::time_snr_transform_check;
use immse::ct::wonham::filtered_path;
use immse::ct::{telegraph_cmmse, telegraph_mmse, wonham_ensemble, TelegraphModel};
use immse::{Check, Estimate, McConfig};
use serde::Serialize;

use crate::error::CliError;
use crate::parse;
use crate::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Telegraph,
    ConstantInput,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    pub model: Model,
    /// Telegraph transition rate.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Linear SNR (single value).
    #[arg(long, conflicts_with = "snr_db")]
    pub snr: Option<f64>,
    /// SNR in dB (single value).
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    /// Euler–Maruyama step; defaults to `min(1e-3, 0.01 / max(nu, snr))`.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the first sample path with both filter outputs.
    #[arg(long)]
    pub dump: bool,
    /// Input law for the constant-input model (see `curve --help`).
    #[arg(long, default_value = "binary")]
    pub input: String,
    /// Observation time in `[0, 1]` for the constant-input model.
    #[arg(long, default_value_t = 0.5)]
    pub u: f64,
    /// Output directory for `summary.json`, `path.csv` and the manifest.
    #[arg(long, default_value = "simulate-out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Comparison {
    mean: f64,
    se: f64,
    closed_form: f64,
    z: f64,
}

impl Comparison {
    fn new(e: Estimate, closed_form: f64) -> Self {
        Self {
            mean: e.mean,
            se: e.se,
            closed_form,
            z: (e.mean - closed_form) / e.se,
        }
    }

    /// Within 3 SE, or not enough paths to say.
    fn ok(&self) -> bool {
        !self.z.is_finite() || self.z.abs() <= 3.0
    }
}

#[derive(Serialize)]
struct TelegraphSummary {
    model: Model,
    nu: f64,
    snr: f64,
    dt: f64,
    horizon: f64,
    paths: usize,
    seed: u64,
    causal_at_horizon: Comparison,
    smoothed_at_midpoint: Comparison,
    anticausal_at_midpoint: Comparison,
    passed: bool,
}

#[derive(Serialize)]
struct ConstantSummary<'a> {
    model: Model,
    input: &'a str,
    snr: f64,
    u: f64,
    paths: usize,
    seed: u64,
    checks: &'a [Check],
    passed: bool,
}

fn snr(a: &SimulateArgs) -> f64 {
    match (a.snr, a.snr_db) {
        (Some(s), _) => s,
        (None, Some(db)) => parse::db_to_linear(db),
        (None, None) => 10f64.sqrt(),
    }
}

fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn run(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let snr = snr(a);
    std::fs::create_dir_all(&a.out)?;
    let summary_path = a.out.join("summary.json");
    let mut artifacts = vec![summary_path.clone()];
    let passed = match a.model {
        Model::Telegraph => {
            let m = TelegraphModel::new(a.nu, snr)?;
            let dt = a.dt.unwrap_or_else(|| 1e-3f64.min(0.01 / a.nu.max(snr)));
            let mc = McConfig::new(a.seed, a.paths).with_dt(dt).with_horizon(a.horizon);
            let e = wonham_ensemble(&m, &mc)?;
            let (c, n) = (telegraph_cmmse(&m)?, telegraph_mmse(&m)?);
            let s = TelegraphSummary {
                model: a.model,
                nu: a.nu,
                snr,
                dt,
                horizon: a.horizon,
                paths: a.paths,
                seed: a.seed,
                causal_at_horizon: Comparison::new(e.causal, c),
                smoothed_at_midpoint: Comparison::new(e.smoothed, n),
                anticausal_at_midpoint: Comparison::new(e.anticausal, c),
                passed: false,
            };
            let passed = s.causal_at_horizon.ok() && s.smoothed_at_midpoint.ok() && s.anticausal_at_midpoint.ok();
            write_json(&summary_path, &TelegraphSummary { passed, ..s })?;
            if a.dump {
                let f = filtered_path(&m, a.horizon, dt, a.seed, 0)?;
                let path_csv = a.out.join("path.csv");
                let mut w = csv::Writer::from_path(&path_csv)?;
                w.write_record(["t", "x", "dy", "xhat_causal", "xhat_smooth"])?;
                for (k, t) in f.path.times().iter().enumerate() {
                    w.write_record([
                        t.to_string(),
                        f.path.x[k].to_string(),
                        f.path.dy[k].to_string(),
                        f.causal[k].to_string(),
                        f.smoothed[k].to_string(),
                    ])?;
                }
                w.flush()?;
                artifacts.push(path_csv);
            }
            passed
        }
        Model::ConstantInput => {
            let law = parse::input_law(&a.input)?;
            let r = time_snr_transform_check(&law, snr, a.u, &McConfig::new(a.seed, a.paths))?;
            let passed = a.paths < 2 || r.passed();
            write_json(
                &summary_path,
                &ConstantSummary {
                    model: a.model,
                    input: &a.input,
                    snr,
                    u: a.u,
                    paths: a.paths,
                    seed: a.seed,
                    checks: &r.checks,
                    passed,
                },
            )?;
            passed
        }
    };
    Ok(Outcome {
        passed,
        artifacts,
        seeds: vec![a.seed],
        tolerances: vec![("standard_errors", 3.0)],
    })
}
