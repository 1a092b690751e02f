//! Exact synthesis of Brownian, fractional Brownian and mixed sample paths.
//!
//! fBm increments are drawn by circulant embedding of the fractional Gaussian
//! noise autocovariance on equidistant grids, and by a dense Cholesky
//! factorisation of the fBm covariance on arbitrary grids. Both are exact in
//! distribution.
//!
//! Re-sampling a refined grid with the same seed does *not* extend the coarse
//! path. Studies over nested partitions simulate one path on the finest grid
//! and use [`SamplePath::restrict`] for the coarser levels, which is exactly
//! nested.

mod fbm;
mod grid;
mod path;
mod seed;

pub use fbm::{fbm_covariance, fgn_autocovariance, FbmGenerator, FbmMethod};
pub use grid::{make_equidistant_grid, TimeGrid};
pub use path::{Hurst, PathKind, SamplePath};
pub use seed::{Seed, Stream};

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::Result;

/// Brownian motion on `grid`, drawn from the [`Stream::Brownian`] substream of `seed`.
pub fn sample_brownian(grid: &Arc<TimeGrid>, seed: Seed) -> SamplePath {
    let mut rng = seed.rng(Stream::Brownian);
    let times = grid.times();
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    let mut level = 0.0;
    for w in times.windows(2) {
        let z: f64 = StandardNormal.sample(&mut rng);
        level += (w[1] - w[0]).sqrt() * z;
        values.push(level);
    }
    SamplePath::from_parts(grid.clone(), values, PathKind::Brownian, seed)
}

/// Fractional Brownian motion on `grid`, drawn from the [`Stream::Fractional`]
/// substream of `seed`.
///
/// Builds a fresh [`FbmGenerator`]; callers sampling many paths on one grid
/// should build the generator once and reuse it.
pub fn sample_fbm(grid: &Arc<TimeGrid>, hurst: Hurst, seed: Seed) -> Result<SamplePath> {
    Ok(FbmGenerator::new(grid.clone(), hurst)?.sample(seed))
}

/// A mixed path `X = W + B^H` together with its two components.
#[derive(Debug, Clone)]
pub struct MixedPath {
    pub mixed: SamplePath,
    pub brownian: SamplePath,
    pub fractional: SamplePath,
}

/// Mixed Brownian / fractional Brownian motion on `grid`.
///
/// `W` and `B^H` come from independent substreams of `seed`, so the components
/// coincide with `sample_brownian(grid, seed)` and `sample_fbm(grid, H, seed)`.
pub fn sample_mixed(grid: &Arc<TimeGrid>, hurst: Hurst, seed: Seed) -> Result<MixedPath> {
    let generator = FbmGenerator::new(grid.clone(), hurst)?;
    Ok(generator.sample_mixed(seed))
}

impl FbmGenerator {
    pub fn sample_mixed(&self, seed: Seed) -> MixedPath {
        let brownian = sample_brownian(self.grid(), seed);
        let fractional = self.sample(seed);
        let values = brownian
            .values()
            .iter()
            .zip(fractional.values())
            .map(|(w, b)| w + b)
            .collect();
        let mixed =
            SamplePath::from_parts(self.grid().clone(), values, PathKind::Mixed(self.hurst()), seed);
        MixedPath {
            mixed,
            brownian,
            fractional,
        }
    }
}
