mod curve;
mod error;
mod manifest;
mod parse;
mod simulate;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{beside, file_name, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "immse", version, about = "MMSE and mutual information for Gaussian channels")]
struct Cli {
    /// Worker threads; `--threads 1` gives the canonical bit-exact outputs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate a quantity against SNR as CSV.
    Curve(curve::CurveArgs),
    /// Run a verification suite and emit a JSON report.
    Verify(verify::VerifyArgs),
    /// Simulate sample paths and ensemble errors.
    Simulate(simulate::SimulateArgs),
    /// Rerun a manifest single-threaded and compare artifacts byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    manifest: PathBuf,
    /// Directory for the regenerated artifacts.
    #[arg(long)]
    out_dir: PathBuf,
}

/// Result of a command: exit status and the artifacts it wrote.
pub struct Outcome {
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    pub tolerances: Vec<(&'static str, f64)>,
}

fn to_value<T: Serialize>(t: &T) -> serde_json::Value {
    serde_json::to_value(t).unwrap_or(serde_json::Value::Null)
}

/// Runs a non-replay command and writes its manifest beside the artifacts.
fn execute(command: &Command, argv: &[String], threads: Option<usize>) -> Result<bool, CliError> {
    let start = Instant::now();
    let (name, params, outcome, manifest_path) = match command {
        Command::Curve(a) => {
            let o = curve::run(a)?;
            ("curve", to_value(a), o, a.out.as_deref().map(beside))
        }
        Command::Verify(a) => {
            let o = verify::run(a)?;
            ("verify", to_value(a), o, a.out.as_deref().map(beside))
        }
        Command::Simulate(a) => {
            let o = simulate::run(a)?;
            ("simulate", to_value(a), o, Some(a.out.join("manifest.json")))
        }
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    };
    if let Some(path) = manifest_path {
        let mut m = RunManifest::new(name, argv, params, threads);
        m.seeds = outcome.seeds;
        for (k, v) in outcome.tolerances {
            m.tolerance(k, v);
        }
        m.artifacts = outcome.artifacts.iter().map(|p| file_name(p)).collect();
        m.wall_clock_seconds = start.elapsed().as_secs_f64();
        m.write(&path)?;
    }
    Ok(outcome.passed)
}

#[derive(Serialize)]
struct ReplayEntry {
    name: String,
    identical: bool,
}

#[derive(Serialize)]
struct ReplayReport {
    command: String,
    identical: bool,
    artifacts: Vec<ReplayEntry>,
}

fn redirect(command: &mut Command, out_dir: &Path) -> Result<(), CliError> {
    let renamed = |p: &Option<PathBuf>| -> Result<PathBuf, CliError> {
        let p = p.as_ref().ok_or_else(|| CliError::Usage("manifest has no output path to replay".into()))?;
        Ok(out_dir.join(p.file_name().unwrap_or_default()))
    };
    match command {
        Command::Curve(a) => a.out = Some(renamed(&a.out)?),
        Command::Verify(a) => a.out = Some(renamed(&a.out)?),
        Command::Simulate(a) => a.out = out_dir.to_path_buf(),
        Command::Replay(_) => return Err(CliError::Usage("cannot replay a replay".into())),
    }
    Ok(())
}

fn replay(args: &ReplayArgs) -> Result<bool, CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let mut argv = vec!["immse".to_string()];
    argv.extend(manifest.args.iter().cloned());
    let mut cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out_dir)?;
    redirect(&mut cli.command, &args.out_dir)?;
    execute(&cli.command, &manifest.args, Some(1))?;

    let original_dir = args.manifest.parent().unwrap_or(Path::new("."));
    let mut entries = vec![];
    for name in &manifest.artifacts {
        let a = std::fs::read(original_dir.join(name))?;
        let b = std::fs::read(args.out_dir.join(name))?;
        entries.push(ReplayEntry {
            name: name.clone(),
            identical: a == b,
        });
    }
    let report = ReplayReport {
        command: manifest.command,
        identical: entries.iter().all(|e| e.identical),
        artifacts: entries,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    std::io::Write::write_all(&mut std::io::stdout().lock(), text.as_bytes())?;
    Ok(report.identical)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if matches!(cli.command, Command::Replay(_)) { Some(1) } else { cli.threads };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = match &cli.command {
        Command::Replay(a) => replay(a),
        other => execute(other, &argv, cli.threads),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
