//! `manifest.toml`: every artifact of a run with its SHA-256, grouped by the
//! stage that wrote it together with that stage's input hash.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub input_hash: String,
    /// relative path -> sha256
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_bytes(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_bytes(&std::fs::read(path)?))
}

/// Hash of a list of text parts, separated so that boundaries matter.
pub fn hash_parts<S: AsRef<str>>(parts: &[S]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.as_ref().len() as u64).to_le_bytes());
        h.update(p.as_ref().as_bytes());
    }
    hex::encode(h.finalize())
}

impl Manifest {
    pub fn load_or_default(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::stage("manifest", e))?;
        toml::from_str(&text).map_err(|e| CliError::stage("manifest", e))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| CliError::stage("manifest", e))?;
        std::fs::write(dir.join(MANIFEST), text).map_err(|e| CliError::stage("manifest", e))
    }

    /// True when `stage` ran with `input_hash` and all of its outputs are
    /// still on disk unchanged.
    pub fn is_current(&self, dir: &Path, stage: &str, input_hash: &str) -> bool {
        let Some(rec) = self.stages.get(stage) else {
            return false;
        };
        rec.input_hash == input_hash
            && !rec.outputs.is_empty()
            && rec
                .outputs
                .iter()
                .all(|(rel, hash)| sha256_file(&dir.join(rel)).is_ok_and(|h| &h == hash))
    }

    pub fn output_hash(&self, stage: &str, rel: &str) -> Option<&str> {
        self.stages.get(stage)?.outputs.get(rel).map(String::as_str)
    }

    pub fn artifact_count(&self) -> usize {
        self.stages.values().map(|s| s.outputs.len()).sum()
    }

    pub fn record(&mut self, dir: &Path, stage: &str, input_hash: String, outputs: &[String]) -> Result<()> {
        let mut rec = StageRecord {
            input_hash,
            outputs: BTreeMap::new(),
        };
        for rel in outputs {
            let h = sha256_file(&dir.join(rel))
                .map_err(|_| CliError::MissingArtifact(dir.join(rel)))?;
            rec.outputs.insert(rel.clone(), h);
        }
        self.stages.insert(stage.to_string(), rec);
        Ok(())
    }
}
