//! Run manifests: which configuration produced a result file, and checks
//! that refuse result files whose rows or configuration were altered.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::row::{read_jsonl, ResultRow, SCHEMA_VERSION};
use crate::runner::InstanceFailure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub harness_version: String,
    pub core_version: String,
    /// SHA-256 of the canonical configuration JSON.
    pub config_hash: String,
    pub config: RunConfig,
    /// SHA-256 of the result file bytes.
    pub rows_sha256: String,
    pub rows: usize,
    pub failures: Vec<InstanceFailure>,
    pub wall_time_s: f64,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the fields that determine the rows; worker count and output path
/// do not take part.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    Ok(hex_digest(&serde_json::to_vec(&cfg.canonical())?))
}

/// `<rows file>.manifest.json`.
pub fn manifest_path(rows_path: &Path) -> PathBuf {
    let mut s = rows_path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

impl Manifest {
    pub fn build(cfg: &RunConfig, rows_path: &Path, rows: usize, failures: Vec<InstanceFailure>, wall_time_s: f64) -> Result<Self> {
        Ok(Manifest {
            schema: SCHEMA_VERSION,
            harness_version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: dtc_core::VERSION.to_string(),
            config_hash: config_hash(cfg)?,
            config: cfg.clone(),
            rows_sha256: hex_digest(&std::fs::read(rows_path)?),
            rows,
            failures,
            wall_time_s,
        })
    }
}

pub fn write_manifest(rows_path: &Path, m: &Manifest) -> Result<PathBuf> {
    let path = manifest_path(rows_path);
    std::fs::write(&path, serde_json::to_string_pretty(m)?)?;
    Ok(path)
}

/// Loads a result file after checking it against its manifest.
pub fn load_verified(rows_path: &Path) -> Result<(Manifest, Vec<ResultRow>)> {
    let mpath = manifest_path(rows_path);
    let text = std::fs::read_to_string(&mpath)
        .map_err(|e| HarnessError::Manifest(format!("{}: {e}", mpath.display())))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| HarnessError::Manifest(format!("{}: {e}", mpath.display())))?;
    if m.schema != SCHEMA_VERSION {
        return Err(HarnessError::Manifest(format!("schema {} unsupported", m.schema)));
    }
    if config_hash(&m.config)? != m.config_hash {
        return Err(HarnessError::Manifest(format!("{}: configuration does not match its hash", mpath.display())));
    }
    if hex_digest(&std::fs::read(rows_path)?) != m.rows_sha256 {
        return Err(HarnessError::Manifest(format!("{}: rows do not match the manifest", rows_path.display())));
    }
    let rows = read_jsonl(rows_path)?;
    if rows.len() != m.rows || rows.iter().any(|r| r.protocol != m.config.protocol.name()) {
        return Err(HarnessError::Manifest(format!("{}: row count or protocol differs from the manifest", rows_path.display())));
    }
    Ok((m, rows))
}
