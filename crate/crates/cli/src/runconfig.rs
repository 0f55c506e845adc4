//! Reproducibility sidecar: every output artifact gets a `<name>.run.json`
//! recording the fully resolved invocation that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// Tool version that produced the artifact.
    pub version: String,
    /// Complete argument vector with all defaults made explicit; replaying
    /// it against the same inputs reproduces the artifact byte for byte.
    pub args: Vec<String>,
}

impl RunConfig {
    pub fn new(args: Vec<String>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            args,
        }
    }

    /// Writes `<out>.run.json` beside the artifact at `out`.
    pub fn write_next_to(&self, out: &Path) -> Result<PathBuf> {
        let mut name = out
            .file_name()
            .with_context(|| format!("output path {} has no file name", out.display()))?
            .to_os_string();
        name.push(".run.json");
        let path = out.with_file_name(name);
        let json = serde_json::to_string_pretty(self).context("serializing run config")?;
        fs::write(&path, json + "\n")
            .with_context(|| format!("writing run config {}", path.display()))?;
        Ok(path)
    }
}
