use std::fs;
use std::path::{Path, PathBuf};

use posnb_core::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::datasets::DatasetHash;
use crate::error::{output, CliResult};

/// Provenance written next to every result before the result itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// RFC 3339, UTC. Taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: String,
    pub command: String,
    pub config_path: PathBuf,
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetHash>,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<PathBuf>,
}

pub fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    fixed.unwrap_or_else(chrono::Utc::now).to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path, config: &ExperimentConfig) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: timestamp(),
            command: command.to_owned(),
            config_path: config_path.to_path_buf(),
            config: config.clone(),
            datasets: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| output(path, e))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| output(path, e))
}
