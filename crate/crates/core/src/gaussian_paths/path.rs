use std::fmt;
use std::io::Write;
use std::sync::Arc;

use super::{Seed, TimeGrid};
use crate::{Error, Result};

/// Hurst index restricted to the long-memory range `1/2 < H < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.5 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::invalid(format!(
                "Hurst index must lie in (1/2, 1), got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `2H`, the exponent of the fBm variance `t^{2H}`.
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    /// `H(2H − 1)`, the constant in front of the kernel `|u − v|^{2H−2}`.
    pub fn kernel_constant(self) -> f64 {
        self.0 * (2.0 * self.0 - 1.0)
    }
}

impl fmt::Display for Hurst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    Brownian,
    FBm(Hurst),
    Mixed(Hurst),
}

/// Process values on a [`TimeGrid`], starting at the origin.
#[derive(Debug, Clone)]
pub struct SamplePath {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
    kind: PathKind,
    seed: Seed,
}

impl SamplePath {
    pub(crate) fn from_parts(grid: Arc<TimeGrid>, values: Vec<f64>, kind: PathKind, seed: Seed) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self {
            grid,
            values,
            kind,
            seed,
        }
    }

    /// Wrap externally supplied values (e.g. a path read back from CSV).
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>, kind: PathKind, seed: Seed) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self::from_parts(grid, values, kind, seed))
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    /// `X_T`.
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// `ΔX_k = X_{t_k} − X_{t_{k−1}}`, `k = 1..=n`.
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// The same path observed on the coarser grid `sub ⊆ grid`.
    pub fn restrict(&self, sub: &Arc<TimeGrid>) -> Result<SamplePath> {
        let idx = self
            .grid
            .locate_subgrid(sub)
            .ok_or_else(|| Error::invalid("restriction grid is not a sub-grid of the path grid"))?;
        let values = idx.iter().map(|&i| self.values[i]).collect();
        Ok(Self::from_parts(sub.clone(), values, self.kind, self.seed))
    }

    /// Adds `c` to every value (no longer starting at 0; used in invariance checks).
    pub fn shifted(&self, c: f64) -> SamplePath {
        let values = self.values.iter().map(|v| v + c).collect();
        Self::from_parts(self.grid.clone(), values, self.kind, self.seed)
    }

    pub fn scaled(&self, c: f64) -> SamplePath {
        let values = self.values.iter().map(|v| v * c).collect();
        Self::from_parts(self.grid.clone(), values, self.kind, self.seed)
    }

    /// CSV dump with header `t,value`; floats use the shortest representation
    /// that parses back to the identical `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.grid.times().iter().zip(&self.values) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }

    /// Parse the format written by [`SamplePath::write_csv`]. Lines starting
    /// with `#` are skipped.
    pub fn read_csv(text: &str) -> Result<SamplePath> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some("t,value") => {}
            other => {
                return Err(Error::invalid(format!(
                    "expected header `t,value`, found {other:?}"
                )))
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::invalid(format!("row {}: expected two columns", i + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("row {}: {e}", i + 1)))
            };
            times.push(parse(t)?);
            values.push(parse(v)?);
        }
        let n = times.len().saturating_sub(1);
        let horizon = times.last().copied().unwrap_or(0.0);
        // Recognise equidistant dumps so the fast lag-indexed routines apply.
        let grid = match TimeGrid::equidistant(horizon, n.max(1)) {
            Ok(g) if n >= 1 && g.times() == times.as_slice() => g,
            _ => TimeGrid::from_times(times)?,
        };
        SamplePath::new(Arc::new(grid), values, PathKind::Brownian, Seed(0))
    }
}
