//! Tabular command output.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits; non-finite values become `nan`/`inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV rows plus `key=value` summary lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
    /// False when a run failed to complete.
    pub ok: bool,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Vec::new(),
            ok: true,
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    /// Value of the first summary line with this key.
    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io_err = |e: csv::Error| Error::Io(format!("writing CSV: {e}"));
        wr.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            wr.write_record(row).map_err(io_err)?;
        }
        wr.flush().map_err(|e| Error::Io(format!("writing CSV: {e}")))
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.summary {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    /// Writes the CSV to `out` (stdout when `None`) and the summary to
    /// `summary` (stderr when `None`).
    pub fn emit(&self, out: Option<&Path>, summary: Option<&Path>) -> Result<()> {
        let open = |p: &Path| {
            File::create(p).map_err(|e| Error::Io(format!("cannot create {}: {e}", p.display())))
        };
        match out {
            Some(p) => self.write_csv(open(p)?)?,
            None => self.write_csv(io::stdout().lock())?,
        }
        let res = match summary {
            Some(p) => self.write_summary(open(p)?),
            None => self.write_summary(io::stderr().lock()),
        };
        res.map_err(|e| Error::Io(format!("writing summary: {e}")))
    }
}
