use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_bytes, write_atomic};
use crate::error::{Error, Result};

/// Inputs and outputs of one pipeline stage, keyed by file name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_seconds: f64,
}

/// Record of a run: what produced which files. Digests are SHA-256, hex.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    pub warnings: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(config_hash: String, seed: u64) -> Self {
        RunManifest {
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            ..RunManifest::default()
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Replaces any earlier record of the same stage.
    pub fn record(&mut self, stage: StageRecord) {
        self.stages.retain(|s| s.name != stage.name);
        self.stages.push(stage);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        json.push(b'\n');
        write_atomic(path, &json)
    }

    pub fn read(path: &Path) -> Result<Self> {
        serde_json::from_slice(&read_bytes(path)?)
            .map_err(|e| Error::parse(path.display().to_string(), 0, format!("line {}: {e}", e.line())))
    }
}
