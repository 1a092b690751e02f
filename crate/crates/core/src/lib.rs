//! Simulation and estimation toolkit for the quadratic variation of mixed
//! Brownian / fractional Brownian motion `X = W + B^H`, `H ∈ (1/2, 1)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian_paths`] synthesises exact Brownian, fractional Brownian and
//!   mixed sample paths on a [`TimeGrid`] from a reproducible [`Seed`].
//! * [`pathwise_integrals`] holds the discrete pathwise calculus: left-point
//!   Riemann–Stieltjes sums, the oscillatory integral via integration by
//!   parts, iterated double integrals and realized quadratic variation.
//! * [`periodogram`] builds the periodogram `I_T(X; λ)` and the randomized
//!   periodogram `E_ξ I_T(X; Lξ)` on top of those integrals.
//! * [`error_moments`] evaluates the closed-form bias and variance
//!   functionals used as Monte Carlo oracles.
//! * [`experiments`] runs reproducible Monte Carlo studies and writes CSV.

pub mod error;
pub mod error_moments;
pub mod experiments;
pub mod gaussian_paths;
pub mod pathwise_integrals;
pub mod periodogram;
pub mod quadrature;
pub mod randomizer;
pub mod stats;

pub use error::{Error, Result};
pub use gaussian_paths::{
    fbm_covariance, make_equidistant_grid, sample_brownian, sample_fbm, sample_mixed, FbmGenerator,
    Hurst, MixedPath, PathKind, SamplePath, Seed, TimeGrid,
};
pub use num_complex::Complex64;
pub use periodogram::{QuadratureRule, QuadratureSpec};
pub use randomizer::{RandomizerFamily, RandomizerSpec};
