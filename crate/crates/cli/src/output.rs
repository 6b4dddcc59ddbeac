//! Output-directory plumbing: atomic writes and the resolved-config record.

use std::path::{Path, PathBuf};

use cicf_core::{Error, Result};

use crate::config::ExperimentConfig;

/// Resolves and creates the output directory.
pub fn prepare_out_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    let dir = config
        .output
        .directory
        .clone()
        .ok_or_else(|| Error::config("no output directory (set output.directory or pass --out)"))?;
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().ok_or_else(|| Error::config(format!("bad output path {}", path.display())))?;
    std::fs::create_dir_all(dir)?;
    let mut tmp = path.to_path_buf();
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::config(format!("bad output path {}", path.display())))?;
    tmp.set_file_name(format!(".{name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Serializes a value as pretty JSON with a trailing newline and writes it
/// atomically.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

/// Records the fully resolved configuration next to the outputs.
pub fn write_resolved_config(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    write_json(&dir.join("resolved-config.json"), config)
}
