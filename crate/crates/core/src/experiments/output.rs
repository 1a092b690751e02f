//! CSV tables produced by the experiment runners.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error_moments::MomentReport;
use crate::{Error, Result};

/// A CSV table with a fixed header. Floats are written with `{}`, the
/// shortest representation that parses back to the same `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of a numeric column.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect()
    }

    pub fn write<W: Write>(&self, preamble: &[String], mut out: W) -> io::Result<()> {
        for line in preamble {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn from_reports(reports: &[MomentReport]) -> Self {
        let mut t = Self::new(&MomentReport::CSV_HEADER.split(',').collect::<Vec<_>>());
        for r in reports {
            t.push(r.csv_row().split(',').map(str::to_string).collect());
        }
        t
    }
}

/// Shortest decimal that parses back to the same `f64`; scientific notation
/// outside `[1e-5, 1e16)` so tiny deviations stay readable.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub(crate) trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        format_float(*self)
    }
}

impl Cell for &f64 {
    fn cell(&self) -> String {
        format_float(**self)
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_cell!(usize, u64, bool, &usize);

/// Shorthand for row building.
pub(crate) fn cell(v: impl Cell) -> String {
    v.cell()
}

/// Everything a runner produces. Diagnostics and failures are for humans and
/// are not part of the CSV output.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub echo: Vec<String>,
    /// One row per replicate (and `L` or level).
    pub records: Table,
    /// Per-`L` or per-level aggregates, recomputable from `records`.
    pub summary: Table,
    /// Monte Carlo estimates against closed forms.
    pub reports: Vec<MomentReport>,
    pub diagnostics: Vec<String>,
    /// Non-empty when a hard check (Fubini tolerance) failed.
    pub failures: Vec<String>,
}

impl ExperimentOutput {
    pub(crate) fn new(cfg: &ExperimentConfig, records: Table, summary: Table) -> Self {
        Self {
            kind: cfg.kind,
            echo: cfg.echo(),
            records,
            summary,
            reports: Vec::new(),
            diagnostics: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The tables in output order with their file suffixes.
    fn tables(&self) -> Vec<(&'static str, Table)> {
        let mut out = vec![("records", self.records.clone()), ("summary", self.summary.clone())];
        if !self.reports.is_empty() {
            out.push(("moments", Table::from_reports(&self.reports)));
        }
        out
    }

    /// All tables in one stream, each introduced by `# table: name` and
    /// separated by a blank line.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, (name, table)) in self.tables().into_iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            let mut preamble = self.echo.clone();
            preamble.push(format!("# table: {name}"));
            table.write(&preamble, &mut out)?;
        }
        Ok(())
    }

    /// Records to `path`, the other tables next to it as
    /// `<stem>.summary.csv` and `<stem>.moments.csv`. Returns the files written.
    pub fn write_files(&self, path: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (name, table) in self.tables() {
            let target = if name == "records" {
                path.to_path_buf()
            } else {
                sibling(path, name)
            };
            let io_err = |source| Error::Io {
                path: target.clone(),
                source,
            };
            let mut buf = Vec::new();
            table.write(&self.echo, &mut buf).map_err(io_err)?;
            std::fs::write(&target, buf).map_err(io_err)?;
            written.push(target);
        }
        Ok(written)
    }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{name}.csv"))
}
