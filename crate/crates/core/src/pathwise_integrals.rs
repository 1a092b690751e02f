//! Discrete pathwise calculus on a [`TimeGrid`].
//!
//! Stochastic integrals are left-point Riemann–Stieltjes sums
//! `Σ f(t_{k−1}) (g(t_k) − g(t_{k−1}))`. With that convention the identity
//! `|Σ e^{iλt_{k−1}} ΔX_k|² = Σ ΔX_k² + 2 Re Σ_{j<k} e^{iλ(t_{k−1}−t_{j−1})} ΔX_j ΔX_k`
//! holds exactly, not only in the limit.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::gaussian_paths::{SamplePath, TimeGrid};
use crate::{Error, Result};

/// A complex sample value, carried as an explicit `(re, im)` pair.
pub type ComplexSample = Complex64;

/// Integrand values aligned with the points of a grid.
#[derive(Debug, Clone)]
pub struct IntegrandOnGrid {
    grid: Arc<TimeGrid>,
    values: Vec<Complex64>,
}

impl IntegrandOnGrid {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "integrand has {} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<TimeGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.times().iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn from_real(grid: Arc<TimeGrid>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

fn same_grid(a: &Arc<TimeGrid>, b: &Arc<TimeGrid>) -> bool {
    Arc::ptr_eq(a, b) || a.times() == b.times()
}

fn require_same_grid(a: &Arc<TimeGrid>, b: &Arc<TimeGrid>) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(Error::invalid("integrand and integrator live on different grids"))
    }
}

/// Left-point Riemann–Stieltjes sum `Σ f(t_{k−1}) Δg_k`.
pub fn rs_integral(f: &IntegrandOnGrid, g: &SamplePath) -> Result<Complex64> {
    require_same_grid(f.grid(), g.grid())?;
    Ok(f
        .values
        .iter()
        .zip(g.values().windows(2))
        .map(|(fv, w)| fv * (w[1] - w[0]))
        .sum())
}

/// `Σ e^{iλ t_{k−1}} ΔX_k`, the left-point discretisation of `∫_0^T e^{iλt} dX_t`.
pub fn oscillatory_integral_rs(x: &SamplePath, lambda: f64) -> Complex64 {
    let times = x.grid().times();
    x.values()
        .windows(2)
        .zip(times)
        .map(|(w, &t)| {
            let (s, c) = (lambda * t).sin_cos();
            Complex64::new(c, s) * (w[1] - w[0])
        })
        .sum()
}

/// `∫_0^T e^{iλs} dX_s = e^{iλT} X_T − X_0 − iλ ∫_0^T X_s e^{iλs} ds`, with the
/// ordinary integral discretised by the trapezoid rule on the path grid.
pub fn oscillatory_integral_ibp(x: &SamplePath, lambda: f64) -> Complex64 {
    let values = x.values();
    let x0 = values[0];
    let xt = x.terminal();
    if lambda == 0.0 {
        return Complex64::new(xt - x0, 0.0);
    }
    let (s, c) = (lambda * x.grid().horizon()).sin_cos();
    let boundary = Complex64::new(c * xt - x0, s * xt);
    boundary - Complex64::new(0.0, lambda) * trapezoid_fourier(x, lambda)
}

/// Trapezoid approximation of `∫_0^T X_s e^{iλs} ds`.
pub(crate) fn trapezoid_fourier(x: &SamplePath, lambda: f64) -> Complex64 {
    trapezoid(x.grid().times(), |k, t| {
        let (s, c) = (lambda * t).sin_cos();
        Complex64::new(c, s) * x.values()[k]
    })
}

/// Trapezoid rule for a complex integrand given pointwise by `f(index, t)`.
pub(crate) fn trapezoid(times: &[f64], f: impl Fn(usize, f64) -> Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = f(0, times[0]);
    for k in 1..times.len() {
        let cur = f(k, times[k]);
        acc += (prev + cur) * (0.5 * (times[k] - times[k - 1]));
        prev = cur;
    }
    acc
}

/// Sum of squared increments of `x` along `sub`, which must be a sub-grid of
/// the path's grid.
pub fn realized_qv(x: &SamplePath, sub: &TimeGrid) -> Result<f64> {
    let idx = x
        .grid()
        .locate_subgrid(sub)
        .ok_or_else(|| Error::invalid("realized QV partition is not contained in the path grid"))?;
    let v = x.values();
    Ok(idx
        .windows(2)
        .map(|w| {
            let d = v[w[1]] - v[w[0]];
            d * d
        })
        .sum())
}

/// Realized QV along the path's own grid.
pub fn realized_qv_full(x: &SamplePath) -> f64 {
    x.values()
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            d * d
        })
        .sum()
}

/// `Σ_k [Σ_{j<k} kernel(t_{k−1} − t_{j−1}) ΔX_j] ΔY_k`.
///
/// Equidistant grids go through the lag-indexed route
/// [`iterated_double_integral_lagged`]; other grids through the direct
/// `O(n²)` double sum.
pub fn iterated_double_integral(
    kernel: impl Fn(f64) -> Complex64,
    x: &SamplePath,
    y: &SamplePath,
) -> Result<Complex64> {
    require_same_grid(x.grid(), y.grid())?;
    if x.grid().is_equidistant() {
        iterated_double_integral_lagged(kernel, x, y)
    } else {
        iterated_double_integral_naive(kernel, x, y)
    }
}

/// Direct double sum, `O(n²)` kernel evaluations.
pub fn iterated_double_integral_naive(
    kernel: impl Fn(f64) -> Complex64,
    x: &SamplePath,
    y: &SamplePath,
) -> Result<Complex64> {
    require_same_grid(x.grid(), y.grid())?;
    let times = x.grid().times();
    let dx = x.increments();
    let dy = y.increments();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 1..dy.len() {
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..k {
            inner += kernel(times[k] - times[j]) * dx[j];
        }
        total += inner * dy[k];
    }
    Ok(total)
}

/// Lag-indexed form for equidistant grids: `Σ_{d≥1} kernel(dΔt) C(d)` with the
/// increment cross-correlation `C(d) = Σ_k ΔX_{k−d} ΔY_k` computed by FFT.
pub fn iterated_double_integral_lagged(
    kernel: impl Fn(f64) -> Complex64,
    x: &SamplePath,
    y: &SamplePath,
) -> Result<Complex64> {
    require_same_grid(x.grid(), y.grid())?;
    let spacing = x
        .grid()
        .spacing()
        .ok_or_else(|| Error::invalid("lag-indexed double integral needs an equidistant grid"))?;
    let dx = x.increments();
    let dy = y.increments();
    let corr = Correlator::new(dx.len()).cross(&dx, &dy);
    Ok(corr
        .iter()
        .enumerate()
        .skip(1)
        .map(|(d, c)| kernel(d as f64 * spacing) * *c)
        .sum())
}

/// Linear cross-correlation of equal-length real sequences via zero-padded FFT.
pub struct Correlator {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Below this length the direct `O(n²)` sum is used.
const DIRECT_CORRELATION_MAX: usize = 64;

impl Correlator {
    pub fn new(len: usize) -> Self {
        let size = (2 * len).next_power_of_two().max(2);
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    /// `C(d) = Σ_j a_j b_{j+d}`, `d = 0..len`.
    pub fn cross(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.len);
        assert_eq!(b.len(), self.len);
        let n = self.len;
        if n <= DIRECT_CORRELATION_MAX {
            return (0..n)
                .map(|d| (0..n - d).map(|j| a[j] * b[j + d]).sum())
                .collect();
        }
        let size = self.forward.len();
        let mut fa = vec![Complex64::new(0.0, 0.0); size];
        let mut fb = vec![Complex64::new(0.0, 0.0); size];
        for j in 0..n {
            fa[j].re = a[j];
            fb[j].re = b[j];
        }
        self.forward.process(&mut fa);
        self.forward.process(&mut fb);
        for (p, q) in fa.iter_mut().zip(&fb) {
            *p = p.conj() * q;
        }
        self.inverse.process(&mut fa);
        let scale = 1.0 / size as f64;
        fa[..n].iter().map(|z| z.re * scale).collect()
    }

    /// `A(d) = Σ_j a_j a_{j+d}`, with `A(0)` summed directly.
    pub fn auto(&self, a: &[f64]) -> Vec<f64> {
        let mut out = self.cross(a, a);
        if let Some(first) = out.first_mut() {
            *first = a.iter().map(|v| v * v).sum();
        }
        out
    }
}
