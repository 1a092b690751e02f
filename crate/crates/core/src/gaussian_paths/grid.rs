use std::sync::Arc;

use crate::{Error, Result};

/// Ordered sample times `0 = t_0 < t_1 < … < t_n = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    /// Number of intervals when the grid was built by the equidistant constructor.
    equidistant: Option<usize>,
}

/// `n + 1` points `t_k = kT/n`.
pub fn make_equidistant_grid(horizon: f64, n: usize) -> Result<Arc<TimeGrid>> {
    Ok(Arc::new(TimeGrid::equidistant(horizon, n)?))
}

impl TimeGrid {
    pub fn equidistant(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if n == 0 {
            return Err(Error::invalid("grid needs at least one interval"));
        }
        // kT/n rather than k*(T/n) so dyadic refinements nest bit-exactly
        let mut times: Vec<f64> = (0..=n).map(|k| (k as f64 * horizon) / n as f64).collect();
        times[n] = horizon;
        Ok(Self {
            times,
            equidistant: Some(n),
        })
    }

    /// Arbitrary grid; must start at 0 and be strictly increasing.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("grid must start at 0"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("grid times must be finite"));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "grid must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            times,
            equidistant: None,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    /// Number of intervals `n`.
    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Some(T/n)` for grids built by the equidistant constructor.
    pub fn spacing(&self) -> Option<f64> {
        self.equidistant.map(|n| self.horizon() / n as f64)
    }

    pub fn is_equidistant(&self) -> bool {
        self.equidistant.is_some()
    }

    /// Largest interval length `|π|`.
    pub fn mesh(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    /// Halve every interval. The result contains every point of `self`.
    pub fn refine_dyadic(&self) -> Self {
        if let Some(n) = self.equidistant {
            return Self::equidistant(self.horizon(), 2 * n).expect("valid parent grid");
        }
        let mut times = Vec::with_capacity(2 * self.times.len() - 1);
        for w in self.times.windows(2) {
            times.push(w[0]);
            times.push(0.5 * (w[0] + w[1]));
        }
        times.push(self.horizon());
        Self {
            times,
            equidistant: None,
        }
    }

    /// Every `step`-th point. `step` must divide the number of intervals.
    pub fn coarsen(&self, step: usize) -> Result<Self> {
        let n = self.intervals();
        if step == 0 || !n.is_multiple_of(step) {
            return Err(Error::invalid(format!(
                "step {step} does not divide the {n} grid intervals"
            )));
        }
        let times = self.times.iter().step_by(step).copied().collect();
        Ok(Self {
            times,
            equidistant: self.equidistant.map(|n| n / step),
        })
    }

    /// Positions of `sub`'s points inside `self`; `None` unless `sub ⊆ self`.
    pub fn locate_subgrid(&self, sub: &TimeGrid) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(sub.len());
        let mut cursor = 0;
        for &t in sub.times() {
            let offset = self.times[cursor..].iter().position(|&s| s >= t)?;
            cursor += offset;
            if self.times[cursor] != t {
                return None;
            }
            out.push(cursor);
        }
        Some(out)
    }
}
