//! CSV and JSON-lines result artifacts.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use crate::CliError;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Header for tabular Monte Carlo estimates.
pub const ESTIMATE_HEADER: [&str; 8] =
    ["experiment", "spec_hash", "graph", "estimate", "ci_low", "ci_high", "replications", "seed"];

/// Rows and records produced by one run, written when the run finishes.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub experiment: String,
    pub config_hash: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    records: Vec<Map<String, Value>>,
    pub text: Option<String>,
}

/// Paths written by [`Artifacts::write`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

impl Artifacts {
    pub fn new(experiment: String, config_hash: String, header: &[&str]) -> Self {
        Self {
            experiment,
            config_hash,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            records: Vec::new(),
            text: None,
        }
    }

    /// Short form of the config hash used in CSV rows.
    pub fn spec_hash(&self) -> &str {
        &self.config_hash[..16]
    }

    /// Appends a row; the experiment id and short config hash are prepended.
    pub fn row(&mut self, cells: Vec<String>) {
        let mut full = vec![self.experiment.clone(), self.spec_hash().to_string()];
        full.extend(cells);
        debug_assert_eq!(full.len(), self.header.len());
        self.rows.push(full);
    }

    pub fn record(&mut self, payload: Value) {
        let Value::Object(map) = payload else { panic!("records are JSON objects") };
        self.records.push(map);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn records(&self) -> &[Map<String, Value>] {
        &self.records
    }

    /// Writes `<dir>/<experiment>.csv` (replaced) and appends to `<dir>/<experiment>.jsonl`.
    pub fn write(&self, dir: &Path) -> Result<Written, CliError> {
        fs::create_dir_all(dir)?;
        let mut written = Written { csv: None, jsonl: None, text: None };
        if !self.rows.is_empty() {
            let path = dir.join(format!("{}.csv", self.experiment));
            let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Run(e.to_string()))?;
            w.write_record(&self.header).map_err(|e| CliError::Run(e.to_string()))?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| CliError::Run(e.to_string()))?;
            }
            w.flush()?;
            written.csv = Some(path);
        }
        if !self.records.is_empty() {
            let path = dir.join(format!("{}.jsonl", self.experiment));
            let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
            let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            for payload in &self.records {
                let mut rec = Map::new();
                rec.insert("experiment".into(), self.experiment.clone().into());
                rec.insert("config_hash".into(), self.config_hash.clone().into());
                rec.insert("timestamp".into(), timestamp.into());
                rec.insert("version".into(), VERSION.into());
                rec.extend(payload.clone());
                writeln!(f, "{}", Value::Object(rec))?;
            }
            written.jsonl = Some(path);
        }
        if let Some(text) = &self.text {
            let path = dir.join(format!("{}.txt", self.experiment));
            fs::write(&path, text)?;
            written.text = Some(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn writes_and_appends() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new("x".into(), "0123456789abcdef0123".into(), &["experiment", "spec_hash", "v"]);
        a.row(vec!["1, 2".into()]);
        a.record(json!({"v": "1/2"}));
        let w = a.write(dir.path()).unwrap();
        let csv = fs::read_to_string(w.csv.unwrap()).unwrap();
        assert_eq!(csv, "experiment,spec_hash,v\nx,0123456789abcdef,\"1, 2\"\n");
        a.write(dir.path()).unwrap();
        let lines = fs::read_to_string(w.jsonl.unwrap()).unwrap();
        assert_eq!(lines.lines().count(), 2);
        let rec: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(rec["v"], "1/2");
        assert_eq!(rec["version"], VERSION);
    }
}
