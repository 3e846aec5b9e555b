//! Run manifests: enough provenance to reproduce any command's numbers.
//!
//! A manifest records the resolved configuration, the derived substream
//! seeds, content hashes of every input file, and the model fingerprint
//! when one is in play. Re-running a command with inputs hashing the same
//! and the same seeds reproduces identical numeric outputs; timing fields
//! are informational only and deliberately kept out of report files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use textmix::{Error, Result};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub model_fingerprint: Option<String>,
    pub started_unix_s: f64,
    pub wall_s: f64,
}

pub struct ManifestBuilder {
    command: String,
    config: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    input_hashes: BTreeMap<String, String>,
    model_fingerprint: Option<String>,
    started: SystemTime,
    clock: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &impl Serialize) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config: serde_json::to_value(config).expect("argument structs serialize"),
            seeds: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            model_fingerprint: None,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn hash_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.input_hashes.insert(path.display().to_string(), hex);
        Ok(())
    }

    pub fn seed(&mut self, label: &str, value: u64) {
        self.seeds.insert(label.to_string(), value);
    }

    pub fn model_fingerprint(&mut self, fingerprint: &str) {
        self.model_fingerprint = Some(fingerprint.to_string());
    }

    pub fn finish(self) -> RunManifest {
        RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config,
            seeds: self.seeds,
            input_hashes: self.input_hashes,
            model_fingerprint: self.model_fingerprint,
            started_unix_s: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            wall_s: self.clock.elapsed().as_secs_f64(),
        }
    }
}

impl RunManifest {
    /// Log to stderr and optionally persist to a file.
    pub fn emit(&self, also_to: Option<&Path>) -> Result<()> {
        let line = serde_json::to_string(self).expect("manifest serializes");
        eprintln!("run-manifest {line}");
        if let Some(path) = also_to {
            let pretty = serde_json::to_string_pretty(self).expect("manifest serializes");
            fs::write(path, pretty).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
        }
        Ok(())
    }
}
