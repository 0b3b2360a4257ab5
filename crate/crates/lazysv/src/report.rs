//! Tabular results written as CSV plus a JSON mirror.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::SCHEMA_VERSION;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    /// The effective parameters, budgets and constants.
    pub config: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Map<String, Value>,
}

/// JSON value for a float; non-finite values become strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn new(command: &str, config: Value, columns: &[&str]) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io_err = |e: csv::Error| CliError::Io {
            path: "<csv>".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell)).map_err(io_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io {
            path: "<csv>".into(),
            source: std::io::Error::other(e.to_string()),
        })
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("reports serialize");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> CliResult<Self> {
        serde_json::from_slice(bytes).map_err(|e| CliError::config(format!("report: {e}")))
    }

    /// Summary as `key=value` lines, strings unquoted.
    pub fn summary_lines(&self) -> Vec<String> {
        self.summary.iter().map(|(k, v)| format!("{k}={}", cell(v))).collect()
    }

    /// Writes `<command>.csv` and `<command>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let stem = self.command.replace('-', "_");
        write_atomic(&dir.join(format!("{stem}.csv")), &self.to_csv()?)?;
        write_atomic(&dir.join(format!("{stem}.json")), &self.to_json())
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("tail", serde_json::json!({"n": 4}), &["eta", "p_hat", "note"]);
        r.push_row(vec![num(0.1), num(1.0 / 3.0), text("a,b")]);
        r.push_row(vec![num(1e-300), num(f64::NAN), Value::Null]);
        r.set("slope", num(0.987654321));
        r
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn csv_layout() {
        let csv = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "eta,p_hat,note");
        assert_eq!(lines[1], "0.1,0.3333333333333333,\"a,b\"");
        assert_eq!(lines[2], "1e-300,NaN,");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
