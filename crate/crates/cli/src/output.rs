use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Fixed float format for every CSV cell: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

fn record(path: &Path) -> Result<OutputFile> {
    let data = fs::read(path).with_context(|| format!("reading back {}", path.display()))?;
    Ok(OutputFile {
        name: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: format!("{:x}", Sha256::digest(&data)),
        bytes: data.len() as u64,
    })
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<OutputFile>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);
    record(path)
}

pub fn write_text(path: &Path, text: &str) -> Result<OutputFile> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    record(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<OutputFile> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

/// Run record written next to the data files.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize, S: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a [String],
    pub config: C,
    pub input: S,
    pub outputs: Vec<OutputFile>,
    pub wall_time_s: f64,
}

impl<'a, C: Serialize, S: Serialize> RunManifest<'a, C, S> {
    pub fn new(command: &'a [String], config: C, input: S) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            input,
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }
}
