//! Reproducible Monte Carlo studies.
//!
//! A run is fully determined by its [`ExperimentConfig`]: replicate `i` draws
//! its paths from `seed.replicate(i)`, replicates are evaluated on a rayon
//! pool and gathered in replicate order, so the emitted CSV bytes do not
//! depend on the number of worker threads.

mod config;
mod output;
mod runners;

pub use config::{ConfigBuilder, ExperimentConfig, ExperimentKind, PathConfig, Process, QuadChoice, KEYS};
pub use output::{format_float, ExperimentOutput, Table};
pub use runners::{
    fubini_pair, run, run_convergence, run_fubini_check, run_refinement, run_rqv_bias, run_rqv_variance,
    AUTO_DEFECT_MAX, EPSILONS, FUBINI_TOLERANCE,
};
