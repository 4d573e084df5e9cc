use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ndp_core::io::{to_json_string, write_json, ConfigFile};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Hex SHA-256 of the canonical JSON form of a configuration.
pub fn config_hash(config: &ConfigFile) -> CliResult<String> {
    let text = to_json_string(config)?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Run record written next to the outputs. Unlike the report it carries
/// wall-clock times and the thread count.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub config_sha256: String,
    pub seed: u64,
    pub num_sims: usize,
    pub log_scale_factor: f64,
    pub trim: usize,
    pub threads: Option<usize>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}
