//! Run manifests: every artifact-writing command records its resolved
//! configuration, the seeds it consumed, and SHA-256 hashes of all input
//! and output files. Replaying `lrno <command> --config <manifest's
//! config>` reproduces byte-identical outputs, which the recorded hashes
//! let you check.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{io_err, AppError};

#[derive(Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    /// Invoking command, reconstructable as `lrno <sub> --config <file>`
    /// where `<file>` holds the `config` object below.
    pub command: Vec<String>,
    /// Fully resolved parameters (flags merged over config over defaults).
    pub config: Value,
    /// Master seeds consumed by the run.
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub wall_clock_seconds: f64,
}

/// Accumulates manifest fields while a command runs.
pub struct ManifestBuilder {
    command: Vec<String>,
    config: Value,
    seeds: Vec<u64>,
    inputs: Vec<FileHash>,
    outputs: Vec<FileHash>,
    start: Instant,
}

impl ManifestBuilder {
    /// Starts the wall clock. `config` must already be fully resolved.
    pub fn new(subcommand: &str, config: Value) -> Self {
        ManifestBuilder {
            command: vec!["lrno".to_string(), subcommand.to_string()],
            config,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    /// Hashes an input file as it exists right now.
    pub fn input(&mut self, path: &Path) -> Result<(), AppError> {
        let hash = sha256_file(path)?;
        self.inputs.push(FileHash {
            path: path.display().to_string(),
            sha256: hash,
        });
        Ok(())
    }

    /// Hashes an output file; call after writing it.
    pub fn output(&mut self, path: &Path) -> Result<(), AppError> {
        let hash = sha256_file(path)?;
        self.outputs.push(FileHash {
            path: path.display().to_string(),
            sha256: hash,
        });
        Ok(())
    }

    /// Stops the clock and writes the manifest JSON to `path`.
    pub fn write(self, path: &Path) -> Result<(), AppError> {
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| AppError::Run(format!("serializing manifest: {e}")))?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| io_err(&format!("writing manifest {}", path.display()), e))
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| io_err(&format!("hashing {}", path.display()), e))?;
    Ok(sha256_bytes(&bytes))
}

/// Hex SHA-256 of a byte slice.
pub fn sha256_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Sibling manifest path for a single-file artifact: `a/b.json` maps to
/// `a/b.manifest.json`.
pub fn sibling_manifest(out: &Path) -> std::path::PathBuf {
    out.with_extension("manifest.json")
}
