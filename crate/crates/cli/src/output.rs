//! Tables, reports and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A named CSV table. Cells are numbers; text columns go in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(vec![]);
        let fail = |e: csv::Error| CliError::io(format!("csv {}: {e}", self.name));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            // Shortest round-trip formatting keeps output bit-reproducible.
            w.write_record(row.iter().map(|x| format!("{x:?}"))).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::io(format!("csv {}: {e}", self.name)))
    }
}

/// Everything a scenario produces before anything touches the disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOutput {
    pub tables: Vec<Table>,
    pub report: serde_json::Map<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

impl ScenarioOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.report.insert(key.into(), serde_json::to_value(value).expect("report values serialize"));
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub command: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

/// Writes tables and the report, then the manifest listing them. Returns
/// the manifest and its path.
pub fn write_outputs(
    dir: &Path,
    prefix: &str,
    out: &ScenarioOutput,
    mut manifest: RunManifest,
) -> Result<(RunManifest, PathBuf), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for t in &out.tables {
        files.push((format!("{prefix}_{}.csv", t.name), t.to_csv()?));
    }
    let mut report = serde_json::to_vec_pretty(&out.report).expect("report serializes");
    report.push(b'\n');
    files.push((format!("{prefix}_report.json"), report));
    for (name, bytes) in &files {
        write(&dir.join(name), bytes)?;
        manifest.outputs.push(OutputFile { path: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    }
    let path = dir.join(format!("{prefix}_manifest.json"));
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write(&path, &bytes)?;
    Ok((manifest, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_round_trip_formatted() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![0.1, 1e-300]);
        t.push(vec![-2.0, f64::NAN]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "a,b\n0.1,1e-300\n-2.0,NaN\n");
        assert_eq!(t.column("a").unwrap(), vec![0.1, -2.0]);
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
