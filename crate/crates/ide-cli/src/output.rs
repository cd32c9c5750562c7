//! CSV and metadata artifacts.
//!
//! Floats are written in scientific notation with 17 significant digits so a
//! round trip through the file reproduces every f64 bit-exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Uint(usize),
    Float(f64),
    Str(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Uint(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Str(s) => s.clone(),
        }
    }
}

/// 17 significant digits, enough for an exact f64 round trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write an RFC-4180-style CSV file: header row, LF line endings, '.' decimal
/// separator.
pub fn emit_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(header)
        .map_err(|e| CliError::runtime(format!("csv write failed: {e}")))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CliError::runtime(format!(
                "csv row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        let rendered: Vec<String> = row.iter().map(Cell::render).collect();
        w.write_record(&rendered)
            .map_err(|e| CliError::runtime(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| CliError::runtime(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Read back a CSV produced by [`emit_csv`]; returns the header and rows as
/// strings.
pub fn parse_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| CliError::runtime(format!("csv header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| CliError::runtime(format!("csv record: {e}")))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

/// Run metadata: enough to re-run the experiment bit-identically.
pub struct Metadata<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub threads: usize,
    pub wall: Duration,
    /// Labelled truncation depths of any radius series used.
    pub truncation_depths: &'a [(String, usize)],
    /// Resolved configuration (overrides already folded in), TOML-encoded.
    pub config_echo: &'a str,
}

pub fn write_metadata(path: &Path, meta: &Metadata<'_>) -> Result<(), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", meta.command);
    let _ = writeln!(out, "version: {}", meta.version);
    let _ = writeln!(out, "threads: {}", meta.threads);
    let _ = writeln!(out, "wall_seconds: {:.3}", meta.wall.as_secs_f64());
    if meta.truncation_depths.is_empty() {
        let _ = writeln!(out, "truncation_depths: none");
    } else {
        for (label, depth) in meta.truncation_depths {
            let _ = writeln!(out, "truncation_depth[{label}]: {depth}");
        }
    }
    let _ = writeln!(out, "--- resolved config ---");
    out.push_str(meta.config_echo);
    std::fs::write(path, out)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}
