//! Per-run provenance written into every output directory.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub closurekit: &'static str,
    pub cli: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    /// SHA-256 of the config file, or of the argument list when there is none.
    pub config_sha256: String,
    pub seed: u64,
    pub versions: Versions,
    pub outputs: Vec<PathBuf>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: Option<u64>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    pub fn new(command: Vec<String>, config_bytes: Option<&[u8]>, seed: u64) -> Self {
        let hashed = match config_bytes {
            Some(b) => sha256_hex(b),
            None => sha256_hex(command.join("\u{1f}").as_bytes()),
        };
        Self {
            command,
            config_sha256: hashed,
            seed,
            versions: Versions {
                closurekit: closurekit::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
            outputs: Vec::new(),
            started_at: now(),
            finished_at: None,
        }
    }

    /// Create `dir` and write the manifest listing the planned outputs.
    pub fn begin(&mut self, dir: &Path, outputs: &[&str]) -> closurekit::Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| closurekit::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        self.outputs = outputs.iter().map(PathBuf::from).collect();
        closurekit::jsonfmt::write_file(&dir.join(MANIFEST_FILE), self)
    }

    pub fn add_output(&mut self, name: impl Into<PathBuf>) {
        let p = name.into();
        if !self.outputs.contains(&p) {
            self.outputs.push(p);
        }
    }

    pub fn finish(&mut self, dir: &Path) -> closurekit::Result<()> {
        self.finished_at = Some(now());
        closurekit::jsonfmt::write_file(&dir.join(MANIFEST_FILE), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
