//! CSV tables with a `#` provenance header, JSON summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Ordered `(key, value)` header lines; keys may repeat.
pub type Provenance = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // shortest round-trip representation: deterministic and lossless
            Cell::Num(v) if *v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) => v.to_string(),
            Cell::Num(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Num(v) => *v,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    /// Header comment lines, then the CSV body.
    pub fn write_csv(&self, out: &mut dyn Write, provenance: &[(String, String)]) -> std::io::Result<()> {
        for (k, v) in provenance {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }
}

/// Run `f` against `path`, or stdout when `path` is `None`.
pub fn with_output(path: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match path {
        None => f(stdout).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Io { path: p.into(), source })?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|source| CliError::Io { path: p.into(), source })
        }
    }
}

pub fn write_json(out: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_block() {
        let mut t = Table::new(&["t", "x", "note"]);
        t.push(vec![0.0.into(), 0.1.into(), Cell::Empty]);
        t.push(vec![1.0.into(), f64::NAN.into(), "pole".to_string().into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &[("alpha".into(), "0.5".into())]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# alpha = 0.5\nt,x,note\n0,0.1,\n1,NaN,pole\n");
        assert_eq!(t.column("t").unwrap(), vec![0.0, 1.0]);
    }
}
