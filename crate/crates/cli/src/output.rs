//! Output serialization: CSV tables, JSON documents, and the run manifest
//! that accompanies every data file.
//!
//! CSV numeric fields use scientific notation with 9 significant digits,
//! which is locale-independent and byte-reproducible.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// 9 significant digits, locale-independent.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        CsvTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// The manifest carries everything needed to reproduce the data file:
/// resolved configuration, seed and artifact version. No timestamps, so
/// reruns are byte-identical.
#[derive(Serialize)]
pub struct Manifest<C: Serialize> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub grounding_epsilon: f64,
    pub output: String,
    pub config: C,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn write_manifest<C: Serialize>(out: &Path, command: &str, config: C) -> Result<()> {
    let manifest = Manifest {
        artifact: "transparent-games",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        grounding_epsilon: transparent_games::EPSILON,
        output: out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        config,
    };
    write_file(&manifest_path(out), &to_json_pretty(&manifest)?)
}
