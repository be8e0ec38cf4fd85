//! CSV output: `# key: value` metadata, a `label[unit]` header, then rows.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ddmagsim_core::SweepResult;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct CsvError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Scientific notation with 17 significant digits, which round-trips any f64.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.16e}")
}

fn one_line(s: &str) -> String {
    s.replace(['\r', '\n'], " ")
}

pub fn render_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    for (k, v) in &result.metadata {
        let _ = writeln!(out, "# {}: {}", one_line(k), one_line(v));
    }
    let header: Vec<String> = result
        .columns
        .iter()
        .map(|c| format!("{}[{}]", c.label, c.unit))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &result.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<(), CsvError> {
    fs::write(path, render_csv(result)).map_err(|source| CsvError {
        path: path.to_owned(),
        source,
    })
}
