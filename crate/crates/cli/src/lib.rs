//! File formats, configuration, and pipeline commands around `fdkin-core`.
//!
//! Everything that touches the filesystem lives here; the numeric core is
//! IO-free. All outputs are written atomically (temp file + rename) and
//! are byte-identical across runs with the same inputs and seeds.

use std::fs;
use std::io::Write as _;
use std::path::Path;

pub mod cohort;
pub mod config;
pub mod feats_io;
pub mod pipeline;
pub mod report;

/// Machine CSV float format: 17 significant digits.
pub fn fmt_g17(value: f64) -> String {
    format!("{value:.16e}")
}

/// Human report float format: 4 decimals.
pub fn fmt_human(value: f64) -> String {
    format!("{value:.4}")
}

/// Writes a file atomically: the content lands under the final name only
/// as a whole, via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, content: &str) -> anyhow::Result<()> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path)?;
    Ok(())
}
