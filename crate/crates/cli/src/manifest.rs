use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Everything needed to rerun a command, written beside its artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub tolerances: BTreeMap<String, f64>,
    pub threads: Option<usize>,
    pub wall_clock_seconds: f64,
    /// Artifact file names, relative to the manifest's directory.
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], parameters: serde_json::Value, threads: Option<usize>) -> Self {
        Self {
            command: command.to_string(),
            args: args.to_vec(),
            parameters,
            seeds: vec![],
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: BTreeMap::new(),
            threads,
            wall_clock_seconds: 0.0,
            artifacts: vec![],
        }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// `out.csv` → `out.csv.manifest.json`.
pub fn beside(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
