//! CSV and manifest writers.
//!
//! CSV is the single output format: '#'-prefixed comment lines, one header
//! row, then data. Nothing varies between identical runs (no timestamps in
//! the files), so re-running a config byte-identically reproduces every
//! body. The manifest is JSON, written atomically via a temp file rename.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::RawConfig;

/// Column layout version embedded in every CSV comment header and echoed
/// in the manifest.
pub const CSV_SCHEMA_VERSION: &str = "1";

/// Deterministic float formatting: plain decimal in a readable range,
/// scientific outside it. Both forms are shortest-round-trip, so equal
/// bit patterns always produce equal bytes.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_finite() && v.abs() >= 1e-4 && v.abs() < 1e7 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct CsvFile {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub comments: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvFile {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            comments: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.name);
        let mut body = String::new();
        body.push_str(&format!(
            "# molpulse csv schema={CSV_SCHEMA_VERSION} file={}\n",
            self.name
        ));
        for c in &self.comments {
            body.push_str(&format!("# {c}\n"));
        }
        body.push_str(&self.columns.join(","));
        body.push('\n');
        for row in &self.rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// One named pass/fail observation recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CsvSchema {
    pub file: String,
    pub schema_version: String,
    pub columns: Vec<String>,
}

/// Machine-readable record of a run: enough to reproduce it (config echo
/// plus seeds) and to audit it (per-check outcomes, schema versions).
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub deterministic: bool,
    /// Zeroed under --deterministic so reruns compare clean.
    pub wall_clock_seconds: f64,
    pub seeds: BTreeMap<String, u64>,
    pub checks: Vec<CheckOutcome>,
    pub csv_schemas: Vec<CsvSchema>,
    pub config: RawConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: RawConfig, deterministic: bool) -> Self {
        let mut seeds = BTreeMap::new();
        seeds.insert("walk".into(), config.walk.seed);
        seeds.insert("link".into(), config.link.seed);
        Self {
            artifact: "molpulse".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            deterministic,
            wall_clock_seconds: 0.0,
            seeds,
            checks: Vec::new(),
            csv_schemas: Vec::new(),
            config,
        }
    }

    pub fn record_csv(&mut self, file: &CsvFile) {
        self.csv_schemas.push(CsvSchema {
            file: file.name.into(),
            schema_version: CSV_SCHEMA_VERSION.into(),
            columns: file.columns.iter().map(|c| c.to_string()).collect(),
        });
    }

    /// Serializes to `run_manifest.json` in `dir`, atomically: the content
    /// lands under a temporary name and is renamed into place.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("run_manifest.json");
        let tmp = dir.join("run_manifest.json.tmp");
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::config(format!("manifest serialization: {e}")))?;
        {
            let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            f.write_all(body.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
            f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        }
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
