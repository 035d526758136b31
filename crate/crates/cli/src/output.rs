//! Deterministic file output: JSON with stable key order (struct field
//! order) and CSV with 17-significant-digit floats, LF line endings.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Floats in CSV round-trip exactly at 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut body = String::with_capacity(rows.len() * 48 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(row);
        body.push('\n');
    }
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Interval formatter for file names (shortest round-trip float text).
pub fn interval_tag(a: f64, b: f64) -> String {
    format!("i{a}_{b}")
}
