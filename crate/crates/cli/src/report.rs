//! Report assembly and output.
//!
//! The JSON body carries no timestamps or host data, so identical configs
//! produce byte-identical reports.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub version: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub params: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Gate `|lhs − rhs| ≤ tolerance·max(1, |rhs|)`.
    pub fn compare(check: &str, params: Value, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        CheckResult {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance * rhs.abs().max(1.0),
        }
    }

    /// Gate `|lhs − rhs| ≤ tolerance·|rhs|`.
    pub fn relative(check: &str, params: Value, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        CheckResult {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance * rhs.abs(),
        }
    }

    /// Gate `|lhs − rhs| ≤ tolerance`.
    pub fn absolute(check: &str, params: Value, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        CheckResult {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// Records a value without gating on it.
    pub fn informational(check: &str, params: Value, lhs: f64, rhs: f64) -> Self {
        CheckResult {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            tolerance: f64::INFINITY,
            pass: true,
        }
    }

    /// A boolean outcome with the measured quantities attached.
    pub fn verdict(check: &str, params: Value, lhs: f64, rhs: f64, tolerance: f64, pass: bool) -> Self {
        CheckResult {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: Header,
    pub results: Vec<CheckResult>,
    /// Command-specific outcomes, such as the order verdicts.
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Report {
            header: Header {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: config.clone(),
            },
            results: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, r: CheckResult) {
        self.results.push(r);
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.pass).count()
    }

    pub fn to_json(&self) -> String {
        // non-finite floats become null, which is how serde_json encodes them
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// One grid row: `t, value, oracle_value, abs_diff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub t: f64,
    pub value: f64,
    pub oracle_value: f64,
    pub abs_diff: f64,
}

impl GridRow {
    pub fn new(t: f64, value: f64, oracle_value: f64) -> Self {
        GridRow {
            t,
            value,
            oracle_value,
            abs_diff: (value - oracle_value).abs(),
        }
    }
}

/// A named grid destined for its own CSV file.
#[derive(Debug, Clone)]
pub struct GridTable {
    pub file_stem: String,
    pub rows: Vec<GridRow>,
}

pub fn grid_file_stem(prefix: &str, alpha: f64, n: u32) -> String {
    format!("{prefix}_alpha{alpha}_n{n}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_csv(path: &Path, rows: &[GridRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes the report (and grids for csv) to the configured destination.
/// JSON without `--out` goes to stdout.
pub fn emit(report: &Report, grids: &[GridTable], config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    use crate::config::Format;
    let mut written = Vec::new();
    match (&config.out, config.format) {
        (None, _) => print!("{}", report.to_json()),
        (Some(path), Format::Json) => {
            fs::write(path, report.to_json()).map_err(|e| io_err(path, e))?;
            written.push(path.clone());
        }
        (Some(dir), Format::Csv) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            for g in grids {
                let path = dir.join(format!("{}.csv", g.file_stem));
                write_csv(&path, &g.rows)?;
                written.push(path);
            }
            let path = dir.join("report.json");
            fs::write(&path, report.to_json()).map_err(|e| io_err(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn gates() {
        assert!(CheckResult::compare("c", json!({}), 100.0 + 1e-4, 100.0, 1e-5).pass);
        assert!(!CheckResult::absolute("c", json!({}), 100.0 + 1e-4, 100.0, 1e-5).pass);
        assert!(!CheckResult::compare("c", json!({}), 0.1, 0.0, 1e-5).pass);
        assert!(CheckResult::informational("c", json!({}), 5.0, 0.0).pass);
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        write_csv(&path, &[GridRow::new(0.0, 1.0, 0.75), GridRow::new(0.5, 0.25, 0.25)]).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(
            text,
            "t,value,oracle_value,abs_diff\n0.0,1.0,0.75,0.25\n0.5,0.25,0.25,0.0\n"
        );
    }
}
