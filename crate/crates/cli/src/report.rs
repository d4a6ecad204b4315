use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bergman_core::profile::BoundaryProfile;
use bergman_core::{LabError, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// A finished command: the JSON report and any CSV tables beside it.
pub struct Outcome {
    pub name: &'static str,
    pub report: Value,
    pub tables: Vec<(String, String)>,
    /// Exit code once the report has been written; nonzero when the command
    /// produced a report but no result (a divergent iteration).
    pub status: Option<LabError>,
}

impl Outcome {
    pub fn new(name: &'static str, parameters: Value, thresholds: Value, result: Value) -> Self {
        Self {
            name,
            report: json!({
                "schema_version": SCHEMA_VERSION,
                "command": name,
                "parameters": parameters,
                "thresholds": thresholds,
                "result": result,
            }),
            tables: Vec::new(),
            status: None,
        }
    }

    pub fn table(mut self, file: impl Into<String>, csv: String) -> Self {
        self.tables.push((file.into(), csv));
        self
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let text = pretty(&self.report)?;
        if let Some(dir) = out {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            let base = self.name.replace(' ', "-");
            let path = dir.join(format!("{base}.json"));
            fs::write(&path, format!("{text}\n")).map_err(|e| io_error(&path, e))?;
            for (file, body) in &self.tables {
                let path = dir.join(format!("{base}-{file}"));
                fs::write(&path, body).map_err(|e| io_error(&path, e))?;
            }
        }
        // A closed stdout (say, piped into head) is an IO error, not a panic.
        writeln!(std::io::stdout().lock(), "{text}").map_err(|e| LabError::Io(format!("stdout: {e}")))
    }
}

pub fn pretty(v: &Value) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| LabError::Io(e.to_string()))
}

pub fn value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| LabError::Io(e.to_string()))
}

pub fn io_error(path: &Path, e: std::io::Error) -> LabError {
    LabError::Io(format!("{}: {e}", path.display()))
}

pub fn read_text(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Rows of a header plus records, rendered as CSV.
pub fn csv_table<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| LabError::Io(e.to_string());
    wtr.write_record(header).map_err(err)?;
    for row in rows {
        wtr.write_record(row).map_err(err)?;
    }
    let bytes = wtr.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LabError::Io(e.to_string()))
}

pub fn profile_csv(profile: &BoundaryProfile) -> Result<String> {
    csv_table(
        &["band", "depth", "value"],
        profile
            .bands
            .iter()
            .map(|b| vec![b.band.to_string(), b.depth.to_string(), b.value.to_string()]),
    )
}

/// Output of a core CSV writer as a string.
pub fn captured<F>(write: F) -> Result<String>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| LabError::Io(e.to_string()))
}
