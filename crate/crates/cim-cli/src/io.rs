//! CSV ingestion, output formatting, and the CLI error-to-exit-code split.

use cim_core::{CimError, Dataset};
use std::fmt::Write as _;
use std::path::Path;

/// CLI failure classes; usage/config errors exit 2, data errors exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) => m,
        }
    }
}

impl From<CimError> for CliError {
    fn from(e: CimError) -> Self {
        match e {
            CimError::InvalidConfig(m) => CliError::Config(m),
            CimError::InvalidInput(m) | CimError::CalibrationFailed(m) => CliError::Data(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(format!("csv error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reads a headered CSV of real-valued columns. Empty cells abort with a
/// row-numbered error unless `drop_incomplete` performs listwise deletion;
/// non-numeric cells always abort naming row and column.
pub fn read_dataset(path: &Path, drop_incomplete: bool) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("bad header row: {e}")))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() {
        return Err(CliError::Data("input has no columns".into()));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // 1-based, after the header line
        let record = record.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        if record.len() != headers.len() {
            return Err(CliError::Data(format!(
                "row {row}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        let mut values = Vec::with_capacity(headers.len());
        let mut incomplete = false;
        for (cell, name) in record.iter().zip(&headers) {
            if cell.is_empty() {
                if drop_incomplete {
                    incomplete = true;
                    break;
                }
                return Err(CliError::Data(format!(
                    "row {row}, column {name}: empty cell (rerun with --drop-incomplete-rows to delete such rows)"
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "row {row}, column {name}: cannot parse '{cell}' as a real number"
                ))
            })?;
            values.push(v);
        }
        if incomplete {
            continue;
        }
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    }

    Dataset::from_columns(headers, columns).map_err(CliError::from)
}

/// Picks two named columns out of a dataset; a missing name is a usage
/// error naming the column.
pub fn select_pair(data: &Dataset, cols: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = cols.split(',').map(|c| c.trim()).collect();
    if parts.len() != 2 {
        return Err(CliError::Config(format!(
            "--cols expects two comma-separated column names, got '{cols}'"
        )));
    }
    let mut idx = [0usize; 2];
    for (k, name) in parts.iter().enumerate() {
        idx[k] = data.column_index(name).ok_or_else(|| {
            CliError::Config(format!("column '{name}' not found in input"))
        })?;
    }
    Ok((idx[0], idx[1]))
}

/// Parses a scanning increment given either as a fraction like `1/64` or a
/// decimal.
pub fn parse_increment(text: &str) -> CliResult<f64> {
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad increment '{text}'")))?;
        let den: f64 = den
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad increment '{text}'")))?;
        if den == 0.0 {
            return Err(CliError::Config(format!("bad increment '{text}'")));
        }
        Ok(num / den)
    } else {
        text.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad increment '{text}'")))
    }
}

/// Formats a number with 6 significant digits for human-readable output.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = String::new();
    let _ = write!(s, "{x:.decimals$}");
    s
}
