use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use super::{Hurst, PathKind, SamplePath, Seed, Stream, TimeGrid};
use crate::{Error, Result};

/// Relative size below which negative circulant eigenvalues count as rounding noise.
const EIGEN_CLAMP: f64 = 1e-10;

/// `Cov(B^H_s, B^H_t) = ½(s^{2H} + t^{2H} − |t − s|^{2H})`.
pub fn fbm_covariance(s: f64, t: f64, hurst: Hurst) -> f64 {
    let e = hurst.two_h();
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of fractional Gaussian noise at integer lag `k`, unit spacing.
/// `Cov(ΔB_j, ΔB_{j+k})` for unit steps: `½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_autocovariance(k: usize, hurst: Hurst) -> f64 {
    let e = hurst.two_h();
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    /// FFT-based circulant embedding of the stationary increments.
    Circulant,
    /// Cholesky factor of the full covariance matrix.
    Dense,
}

enum Factor {
    Circulant {
        /// `sqrt(λ_k / 2n)` for the `2n` circulant eigenvalues.
        amplitudes: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Dense {
        /// Row-major lower-triangular Cholesky factor.
        lower: Vec<f64>,
        dim: usize,
    },
}

/// Reusable exact fBm sampler for one `(grid, H)` pair.
///
/// Immutable after construction and `Sync`, so one generator can serve many
/// replicates in parallel.
pub struct FbmGenerator {
    grid: Arc<TimeGrid>,
    hurst: Hurst,
    factor: Factor,
}

impl std::fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("intervals", &self.grid.intervals())
            .field("hurst", &self.hurst)
            .field("method", &self.method())
            .finish()
    }
}

impl FbmGenerator {
    /// Circulant embedding on equidistant grids, dense factorisation otherwise
    /// or when the embedding is not nonnegative definite.
    pub fn new(grid: Arc<TimeGrid>, hurst: Hurst) -> Result<Self> {
        if let Some(spacing) = grid.spacing() {
            if let Some(factor) = circulant_factor(grid.intervals(), spacing, hurst) {
                return Ok(Self {
                    grid,
                    hurst,
                    factor,
                });
            }
        }
        Self::dense(grid, hurst)
    }

    /// Force the dense Cholesky route.
    pub fn dense(grid: Arc<TimeGrid>, hurst: Hurst) -> Result<Self> {
        let factor = dense_factor(&grid, hurst)?;
        Ok(Self {
            grid,
            hurst,
            factor,
        })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn method(&self) -> FbmMethod {
        match self.factor {
            Factor::Circulant { .. } => FbmMethod::Circulant,
            Factor::Dense { .. } => FbmMethod::Dense,
        }
    }

    pub fn sample(&self, seed: Seed) -> SamplePath {
        let mut rng = seed.rng(Stream::Fractional);
        let n = self.grid.intervals();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        match &self.factor {
            Factor::Circulant { amplitudes, fft } => {
                let mut buf: Vec<Complex64> = amplitudes
                    .iter()
                    .map(|&a| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(a * re, a * im)
                    })
                    .collect();
                fft.process(&mut buf);
                let mut level = 0.0;
                for z in &buf[..n] {
                    level += z.re;
                    values.push(level);
                }
            }
            Factor::Dense { lower, dim } => {
                let z: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                for i in 0..*dim {
                    let row = &lower[i * dim..i * dim + i + 1];
                    values.push(row.iter().zip(&z).map(|(l, z)| l * z).sum());
                }
            }
        }
        SamplePath::from_parts(self.grid.clone(), values, PathKind::FBm(self.hurst), seed)
    }
}

fn circulant_factor(n: usize, spacing: f64, hurst: Hurst) -> Option<Factor> {
    let size = 2 * n;
    let scale = spacing.powf(hurst.two_h());
    let mut row: Vec<Complex64> = (0..size)
        .map(|k| {
            let lag = if k <= n { k } else { size - k };
            Complex64::new(scale * fgn_autocovariance(lag, hurst), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut row);
    let max = row.iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let min = row.iter().map(|z| z.re).fold(f64::MAX, f64::min);
    if min < -EIGEN_CLAMP * max {
        return None;
    }
    let amplitudes = row
        .iter()
        .map(|z| (z.re.max(0.0) / size as f64).sqrt())
        .collect();
    Some(Factor::Circulant { amplitudes, fft })
}

fn dense_factor(grid: &TimeGrid, hurst: Hurst) -> Result<Factor> {
    let times = &grid.times()[1..];
    let dim = times.len();
    let cov = DMatrix::from_fn(dim, dim, |i, j| fbm_covariance(times[i], times[j], hurst));
    let chol = cov.cholesky().ok_or_else(|| {
        let min_diag = times.iter().map(|t| t.powf(hurst.two_h())).fold(f64::MAX, f64::min);
        Error::Numerical(format!(
            "Cholesky factorisation of the {dim}x{dim} fBm covariance failed \
             (H = {hurst}, mesh = {:e}, smallest variance = {min_diag:e})",
            grid.mesh()
        ))
    })?;
    let l = chol.l();
    let mut lower = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            lower[i * dim + j] = l[(i, j)];
        }
    }
    Ok(Factor::Dense { lower, dim })
}
