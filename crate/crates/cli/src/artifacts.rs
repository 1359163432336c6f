//! Artifact writing: CSV with LF endings and `.` decimals, JSON with
//! sorted keys, and a run manifest tying outputs to inputs and seeds.
//!
//! Everything except the manifest timestamp is a pure function of config
//! and seeds, so re-running a command reproduces the artifacts
//! byte-for-byte.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct ArtifactDir {
    dir: PathBuf,
}

impl ArtifactDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(ArtifactDir {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// CSV writer: `,` delimiter, `.` decimal point (Rust float Display),
    /// LF line endings.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        let path = self.path(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// JSON writer; `serde_json::Value` maps are BTree-backed, so keys come
    /// out sorted.
    pub fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Manifest with input digests, seeds, and versions. The timestamp is
    /// the only non-reproducible field.
    pub fn write_manifest(
        &self,
        command: &str,
        seed: u64,
        jobs: Option<usize>,
        config_digest: Option<String>,
        measure_digest: Option<String>,
    ) -> Result<PathBuf> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = json!({
            "command": command,
            "config_digest": config_digest,
            "measure_digest": measure_digest,
            "seed": seed,
            "jobs": jobs,
            "timestamp_unix": timestamp,
            "version": env!("CARGO_PKG_VERSION"),
        });
        self.write_json("manifest.json", &manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}
