//! Reproducibility manifest written next to every run's artifacts: the
//! config hash, per-stage timings, pass/fail audit results, and a content
//! digest of every emitted file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub residual: f64,
    pub free_dofs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub config_sha256: String,
    pub library_version: String,
    pub stages: Vec<StageTiming>,
    pub checks: Vec<Check>,
    pub files: Vec<FileDigest>,
    #[serde(default)]
    pub solver: Option<SolverStats>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(scenario: &str, config_text: &str) -> Self {
        Manifest {
            scenario: scenario.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            stages: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
            solver: None,
        }
    }

    pub fn stage(&mut self, name: &str, millis: u128) {
        self.stages.push(StageTiming { name: name.to_string(), millis });
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), pass, detail });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Write `content` into the run directory and record its digest.
    pub fn emit(&mut self, dir: &Path, name: &str, content: &str) -> std::io::Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        self.files.push(FileDigest { path: name.to_string(), sha256: sha256_hex(content.as_bytes()) });
        Ok(path)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serialization");
        std::fs::write(dir.join("run_manifest.json"), text)
    }

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(dir.join("run_manifest.json"))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Recompute the digest of every listed file; mismatches returned.
    pub fn verify_digests(&self, dir: &Path) -> anyhow::Result<Vec<String>> {
        let mut bad = Vec::new();
        for f in &self.files {
            let content = std::fs::read(dir.join(&f.path))?;
            if sha256_hex(&content) != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}

/// Machine-readable error record for failed runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub stage: String,
    pub message: String,
}

pub fn write_error_record(dir: &Path, stage: &str, message: &str) {
    let rec = ErrorRecord { stage: stage.to_string(), message: message.to_string() };
    if let Ok(text) = serde_json::to_string_pretty(&rec) {
        let _ = std::fs::write(dir.join("error_record.json"), text);
    }
}
