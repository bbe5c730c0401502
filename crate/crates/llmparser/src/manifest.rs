//! Reproducibility record written next to every produced artifact.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub datasets: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub started_at_unix_ms: u128,
    pub finished_at_unix_ms: u128,
    pub outputs: Vec<String>,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// `<artifact>.manifest.json`
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn new(command: &str, started_at_unix_ms: u128) -> Self {
        Self {
            command: command.to_string(),
            datasets: Vec::new(),
            config: serde_json::Value::Null,
            seed: None,
            started_at_unix_ms,
            finished_at_unix_ms: started_at_unix_ms,
            outputs: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
            notes: Vec::new(),
        }
    }

    /// Stamps the finish time and writes the manifest beside `artifact`.
    pub fn finish(mut self, artifact: &Path) -> io::Result<PathBuf> {
        self.finished_at_unix_ms = unix_ms();
        let path = manifest_path(artifact);
        let mut text = serde_json::to_string_pretty(&self).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
