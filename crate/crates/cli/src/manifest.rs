use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use resonatorsim::experiments::write_atomic;

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments as given, for exact reruns.
    pub argv: Vec<String>,
    /// Parsed flags with defaults filled in.
    pub flags: Value,
    pub config: Option<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub exit_status: u8,
    pub version: &'static str,
    pub threads: Option<usize>,
}

/// `dir/stem.csv` -> `dir/stem.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    out.with_file_name(format!("{stem}.manifest.json"))
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)? + "\n";
        write_atomic(path, text.as_bytes()).map_err(|e| match e {
            resonatorsim::Error::Io(io) => io,
            other => std::io::Error::other(other.to_string()),
        })
    }
}
