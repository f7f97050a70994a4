use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_secs: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            subcommand: subcommand.into(),
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            outputs: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Precondition(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))
    }
}

/// `out.csv` -> `out.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}
