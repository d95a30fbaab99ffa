//! `manifest.json`: config snapshot plus hashes and timings per stage.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, KEYS};
use crate::io::ArtifactRecord;
use crate::{CliError, Result};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub seconds: f64,
    /// Upstream artifacts read by the stage.
    pub inputs: Vec<ArtifactRecord>,
    pub outputs: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Config of the most recent stage run, as `key -> value` text.
    pub config: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn new(config: &PipelineConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: snapshot(config),
            stages: BTreeMap::new(),
        }
    }

    /// Existing manifest in `dir`, or a fresh one if there is none or it
    /// cannot be parsed.
    pub fn load_or_new(dir: &Path, config: &PipelineConfig) -> Self {
        let mut m = std::fs::read(dir.join(FILE_NAME))
            .ok()
            .and_then(|b| serde_json::from_slice::<RunManifest>(&b).ok())
            .unwrap_or_else(|| Self::new(config));
        m.tool = env!("CARGO_PKG_NAME").into();
        m.version = env!("CARGO_PKG_VERSION").into();
        m.config = snapshot(config);
        m
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(FILE_NAME);
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| CliError::io(path, e))
    }

    /// Output hashes of every stage, keyed by `stage/path`.
    pub fn artifact_hashes(&self) -> BTreeMap<String, String> {
        self.stages
            .iter()
            .flat_map(|(stage, r)| r.outputs.iter().map(move |a| (format!("{stage}/{}", a.path), a.sha256.clone())))
            .collect()
    }
}

fn snapshot(config: &PipelineConfig) -> BTreeMap<String, String> {
    KEYS.iter()
        .map(|(k, _)| (k.to_string(), config.get(k).expect("listed key")))
        .collect()
}
