//! The run manifest: written last, so its presence marks a completed run,
//! and it lists every artifact the run emitted.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    /// Paths of every emitted file, relative to the output directory.
    pub artifacts: Vec<String>,
    pub items: usize,
    pub failures: usize,
}

pub struct ManifestBuilder {
    command: String,
    config_hash: String,
    started_unix_ms: u128,
    artifacts: Vec<String>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl ManifestBuilder {
    pub fn start(command: &str, config_hash: &str) -> Self {
        Self {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            started_unix_ms: now_ms(),
            artifacts: Vec::new(),
        }
    }

    pub fn artifact(&mut self, path: impl Into<String>) {
        self.artifacts.push(path.into());
    }

    pub fn artifacts(&mut self, paths: impl IntoIterator<Item = String>) {
        self.artifacts.extend(paths);
    }

    /// Write `manifest.json` into `out_dir`. Returns the failure count back
    /// for the caller's exit code.
    pub fn finish(mut self, out_dir: &Path, items: usize, failures: usize) -> Result<usize> {
        self.artifacts = self
            .artifacts
            .iter()
            .map(|a| {
                Path::new(a)
                    .strip_prefix(out_dir)
                    .map(|rel| rel.display().to_string())
                    .unwrap_or_else(|_| a.clone())
            })
            .collect();
        self.artifacts.sort();
        self.artifacts.dedup();
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            config_hash: self.config_hash,
            started_unix_ms: self.started_unix_ms,
            finished_unix_ms: now_ms(),
            artifacts: self.artifacts,
            items,
            failures,
        };
        std::fs::write(
            out_dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(failures)
    }
}
