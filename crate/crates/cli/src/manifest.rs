//! Run manifests: one `manifest.json` per command invocation.
//!
//! The manifest records the command line, resolved parameters, seed,
//! version, output files with their sha256 and sizes, and the wall-clock
//! duration. Re-running a seeded command from its manifest reproduces
//! every listed output byte-for-byte (the manifest itself carries the
//! wall-clock field and is excluded from that contract).

use crate::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub preset: String,
    /// Resolved physical parameters in external (Hz) units.
    pub params: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
    pub duration_s: f64,
}

pub struct ManifestBuilder {
    started: Instant,
    manifest: RunManifest,
    out_dir: PathBuf,
}

impl ManifestBuilder {
    pub fn begin(
        out_dir: &Path,
        command_line: Vec<String>,
        seed: u64,
        threads: Option<usize>,
        preset: &str,
        params_json: &str,
    ) -> Self {
        Self {
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                schema: "srbeam.manifest.v1".to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command_line,
                seed,
                threads,
                preset: preset.to_string(),
                params: serde_json::from_str(params_json)
                    .unwrap_or(serde_json::Value::String(params_json.to_string())),
                outputs: Vec::new(),
                duration_s: 0.0,
            },
        }
    }

    /// Register a finished output file (hashes its bytes).
    pub fn add_output(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let rel = path
            .strip_prefix(&self.out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        self.manifest.outputs.push(OutputEntry {
            path: rel,
            sha256: format!("{:x}", hasher.finalize()),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Write `manifest.json` in the output directory and return the record.
    pub fn finish(mut self) -> Result<RunManifest, CliError> {
        self.manifest.duration_s = self.started.elapsed().as_secs_f64();
        let path = self.out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::numeric(format!("manifest encode: {e}")))?;
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad manifest: {e}")))
}
