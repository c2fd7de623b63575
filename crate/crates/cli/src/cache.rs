//! Single-file JSON result cache.
//!
//! Entries are keyed by a content hash of the command's semantic parameters
//! plus the crate version, and store the exact output bytes, so a hit can
//! be replayed verbatim and audited against recomputation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MODULE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize, Deserialize, Default)]
pub struct CacheFile {
    pub version: String,
    pub entries: BTreeMap<String, CacheEntry>,
}

#[derive(Serialize, Deserialize, Clone)]
pub struct CacheEntry {
    /// Human-readable key material, for inspection.
    pub params: String,
    /// Seconds since the Unix epoch at creation time.
    pub created_at: u64,
    /// Exact output bytes of the command.
    pub value: String,
}

/// Hash of the semantic parameters; the key of a cache entry.
pub fn cache_key(params: &str) -> String {
    let digest = Sha256::digest(params.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical key material for a command invocation.
pub fn key_params(command: &str, fields: &[(&str, String)]) -> String {
    let mut parts = vec![format!("cmd={command}")];
    parts.extend(fields.iter().map(|(k, v)| format!("{k}={v}")));
    parts.push(format!("version={MODULE_VERSION}"));
    parts.join(";")
}

pub fn load(path: &Path) -> Result<CacheFile, String> {
    if !path.exists() {
        return Ok(CacheFile { version: MODULE_VERSION.to_string(), entries: BTreeMap::new() });
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read cache file {}: {e}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| format!("cache file {} is not valid JSON: {e}", path.display()))
}

pub fn store(path: &Path, file: &CacheFile) -> Result<(), String> {
    let text = serde_json::to_string_pretty(file)
        .map_err(|e| format!("cannot serialize cache: {e}"))?;
    std::fs::write(path, text)
        .map_err(|e| format!("cannot write cache file {}: {e}", path.display()))
}

pub fn now_epoch_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Resolve the effective cache path: the `TENTMORPH_CACHE` environment
/// variable overrides the flag.
pub fn resolve_path(flag: Option<&Path>) -> Option<PathBuf> {
    match std::env::var_os("TENTMORPH_CACHE") {
        Some(env_path) if !env_path.is_empty() => Some(PathBuf::from(env_path)),
        _ => flag.map(Path::to_path_buf),
    }
}
