use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Process};
use super::output::{cell, ExperimentOutput, Table};
use crate::error_moments::{
    randomized_bias_checked, randomized_bias_discrete, rqv_bias_equidistant, rqv_variance_equidistant,
    rqv_variance_equidistant_adjusted, MomentReport,
};
use crate::gaussian_paths::{sample_brownian, FbmGenerator, SamplePath, Seed, TimeGrid};
use crate::pathwise_integrals::{realized_qv, Correlator};
use crate::periodogram::{QuadratureSpec, RandomizedKernel, XQuadrature};
use crate::randomizer::RandomizerFamily;
use crate::stats::{self, Summary};
use crate::{Error, Result};

/// Kernel defect below which `quad = auto` keeps the default quadrature rule.
pub const AUTO_DEFECT_MAX: f64 = 1e-6;
/// Largest tolerated `|I₁ − I₂| / (1 + |I₁|)` in the Fubini check.
pub const FUBINI_TOLERANCE: f64 = 1e-10;
/// Thresholds for the fraction of estimates with `|est − T| > ε`.
pub const EPSILONS: [f64; 2] = [0.1, 0.3];

/// Runs the experiment described by `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.kind {
        ExperimentKind::Convergence | ExperimentKind::RandomizedBias => run_convergence(cfg),
        ExperimentKind::RqvBias => run_rqv_bias(cfg),
        ExperimentKind::RqvVariance => run_rqv_variance(cfg),
        ExperimentKind::Fubini => run_fubini_check(cfg),
        ExperimentKind::Refinement => run_refinement(cfg),
    }
}

/// Evaluates `task` for every replicate on a pool of `cfg.threads` workers
/// and returns the results in replicate order.
fn per_replicate<R, F>(cfg: &ExperimentConfig, task: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, Seed) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    Ok(pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|i| task(i, cfg.seed.replicate(i as u64)))
            .collect()
    }))
}

/// Draws paths of the configured process on one grid.
struct Sampler {
    grid: Arc<TimeGrid>,
    process: Process,
    generator: Option<FbmGenerator>,
}

impl Sampler {
    fn new(cfg: &ExperimentConfig, n: usize) -> Result<Self> {
        let grid = Arc::new(TimeGrid::equidistant(cfg.horizon, n)?);
        let generator = match cfg.process {
            Process::Brownian => None,
            _ => Some(FbmGenerator::new(grid.clone(), cfg.hurst)?),
        };
        Ok(Self {
            grid,
            process: cfg.process,
            generator,
        })
    }

    fn sample(&self, seed: Seed) -> SamplePath {
        match (self.process, &self.generator) {
            (Process::Mixed, Some(g)) => g.sample_mixed(seed).mixed,
            (Process::Fractional, Some(g)) => g.sample(seed),
            _ => sample_brownian(&self.grid, seed),
        }
    }
}

/// The lag table used at one `L`, and how it was chosen.
struct Route {
    l: f64,
    label: String,
    kernel: RandomizedKernel,
}

fn routes(cfg: &ExperimentConfig, grid: &TimeGrid) -> Result<Vec<Route>> {
    cfg.l_grid
        .iter()
        .map(|&l| {
            let (label, kernel) = match cfg.quadrature() {
                Some(q) => (q.to_string(), RandomizedKernel::new(grid, l, &cfg.xi, &q)?),
                None => {
                    let q = QuadratureSpec::default_for(&cfg.xi);
                    let k = RandomizedKernel::new(grid, l, &cfg.xi, &q)?;
                    if k.defect() <= AUTO_DEFECT_MAX {
                        (q.to_string(), k)
                    } else {
                        let exact = QuadratureSpec::exact();
                        (exact.to_string(), RandomizedKernel::new(grid, l, &cfg.xi, &exact)?)
                    }
                }
            };
            Ok(Route { l, label, kernel })
        })
        .collect()
}

/// Randomized periodogram over the `L`-grid, one row per `(replicate, L)`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sampler = Sampler::new(cfg, cfg.n)?;
    let routes = routes(cfg, &sampler.grid)?;
    let correlator = Correlator::new(cfg.n);
    let rows = per_replicate(cfg, |_, seed| {
        let path = sampler.sample(seed);
        let autocorrelation = correlator.auto(&path.increments());
        let estimates: Vec<f64> = routes.iter().map(|r| r.kernel.contract(&autocorrelation)).collect();
        (seed, autocorrelation[0], estimates)
    })?;

    let t = cfg.horizon;
    let mut records = Table::new(&["replicate", "seed", "L", "randomized_periodogram", "realized_qv"]);
    for (i, (seed, rqv, estimates)) in rows.iter().enumerate() {
        for (route, est) in routes.iter().zip(estimates) {
            records.push(vec![cell(i), cell(seed.0), cell(route.l), cell(est), cell(rqv)]);
        }
    }

    let mut summary = Table::new(&[
        "L",
        "route",
        "nodes",
        "self_check",
        "kernel_defect",
        "mean",
        "median",
        "median_abs_err",
        "frac_err_gt_0.1",
        "frac_err_gt_0.3",
        "discrete_bias",
    ]);
    let mut out_reports = Vec::new();
    let mut diagnostics = Vec::new();
    let mut medians = Vec::new();
    for (k, route) in routes.iter().enumerate() {
        let est: Vec<f64> = rows.iter().map(|r| r.2[k]).collect();
        let abs_err: Vec<f64> = est.iter().map(|e| (e - t).abs()).collect();
        let frac = |eps: f64| abs_err.iter().filter(|&&e| e > eps).count() as f64 / est.len() as f64;
        let median_abs = stats::median(&abs_err);
        medians.push(median_abs);
        let discrete = randomized_bias_discrete(t, cfg.hurst, route.kernel.weights());
        summary.push(vec![
            cell(route.l),
            route.label.clone(),
            cell(route.kernel.nodes()),
            cell(route.kernel.self_check()),
            cell(route.kernel.defect()),
            cell(stats::mean(&est)),
            cell(stats::median(&est)),
            cell(median_abs),
            cell(frac(EPSILONS[0])),
            cell(frac(EPSILONS[1])),
            cell(discrete),
        ]);

        let errors: Vec<f64> = est.iter().map(|e| e - t).collect();
        let s = Summary::of(&errors);
        let closed = randomized_bias_checked(t, cfg.hurst, route.l, &cfg.xi)?;
        if closed.self_check > 1e-8 {
            diagnostics.push(format!(
                "L={}: closed-form bias self-check {:e} exceeds 1e-8",
                route.l, closed.self_check
            ));
        }
        out_reports.push(MomentReport::new(
            "randomized_bias",
            t,
            route.l,
            Some(cfg.hurst.value()),
            Some(cfg.xi.to_string()),
            closed.value,
            s.mean,
            s.se_mean,
        ));
        out_reports.push(MomentReport::new(
            "randomized_bias_discrete",
            t,
            route.l,
            Some(cfg.hurst.value()),
            Some(cfg.xi.to_string()),
            discrete,
            s.mean,
            s.se_mean,
        ));
        if route.kernel.self_check() > crate::periodogram::SELF_CHECK_TOLERANCE {
            diagnostics.push(format!(
                "L={}: quadrature {} changes by {:e} under node doubling",
                route.l,
                route.label,
                route.kernel.self_check()
            ));
        }
    }
    let monotone = medians.windows(2).all(|w| w[1] <= w[0]);
    diagnostics.push(format!(
        "median |estimate - T| over L: {} ({})",
        medians.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(", "),
        if monotone { "nonincreasing" } else { "not monotone" }
    ));

    let mut output = ExperimentOutput::new(cfg, records, summary);
    output.reports = out_reports;
    output.diagnostics = diagnostics;
    Ok(output)
}

/// Seed and realized QV on each ladder level, per replicate.
type LadderRows = Vec<(Seed, Vec<f64>)>;

/// Realized QV of one finest path per replicate, observed on every level of
/// the dyadic ladder.
fn ladder_rqv(cfg: &ExperimentConfig) -> Result<(Vec<usize>, LadderRows)> {
    let ladder = cfg.ladder();
    let sampler = Sampler::new(cfg, cfg.n)?;
    let levels: Vec<TimeGrid> = ladder
        .iter()
        .map(|&m| TimeGrid::equidistant(cfg.horizon, m))
        .collect::<Result<_>>()?;
    let rows = per_replicate(cfg, |_, seed| -> Result<(Seed, Vec<f64>)> {
        let path = sampler.sample(seed);
        let qv = levels.iter().map(|g| realized_qv(&path, g)).collect::<Result<Vec<f64>>>()?;
        Ok((seed, qv))
    })?;
    Ok((ladder, rows.into_iter().collect::<Result<_>>()?))
}

fn ladder_records(ladder: &[usize], rows: &[(Seed, Vec<f64>)]) -> Table {
    let mut records = Table::new(&["replicate", "seed", "n", "realized_qv"]);
    for (i, (seed, qv)) in rows.iter().enumerate() {
        for (m, v) in ladder.iter().zip(qv) {
            records.push(vec![cell(i), cell(seed.0), cell(m), cell(v)]);
        }
    }
    records
}

/// `E(RQV) − T` for the configured process on `n` equal steps.
fn rqv_bias_for(cfg: &ExperimentConfig, n: usize) -> f64 {
    let fractional = rqv_bias_equidistant(cfg.horizon, n, cfg.hurst);
    match cfg.process {
        Process::Mixed => fractional,
        Process::Brownian => 0.0,
        Process::Fractional => fractional - cfg.horizon,
    }
}

/// Monte Carlo mean of `RQV − T` against its closed form on every level.
pub fn run_rqv_bias(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (ladder, rows) = ladder_rqv(cfg)?;
    let mut summary = Table::new(&["n", "closed_form", "mean_error", "se", "z"]);
    let mut reports = Vec::new();
    for (k, &m) in ladder.iter().enumerate() {
        let errors: Vec<f64> = rows.iter().map(|r| r.1[k] - cfg.horizon).collect();
        let s = Summary::of(&errors);
        let report = MomentReport::new(
            "rqv_bias",
            cfg.horizon,
            m as f64,
            (cfg.process != Process::Brownian).then_some(cfg.hurst.value()),
            None,
            rqv_bias_for(cfg, m),
            s.mean,
            s.se_mean,
        );
        summary.push(vec![
            cell(m),
            cell(report.closed_form),
            cell(s.mean),
            cell(s.se_mean),
            cell(report.z_score),
        ]);
        reports.push(report);
    }
    let mut output = ExperimentOutput::new(cfg, ladder_records(&ladder, &rows), summary);
    output.reports = reports;
    Ok(output)
}

/// Monte Carlo variance of `RQV − T` against both closed-form variants.
pub fn run_rqv_variance(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (ladder, rows) = ladder_rqv(cfg)?;
    let mut summary = Table::new(&[
        "n",
        "variance",
        "variance_adjusted",
        "mc_variance",
        "mc_se",
        "z",
        "z_adjusted",
    ]);
    let mut reports = Vec::new();
    let mut diagnostics = Vec::new();
    for (k, &m) in ladder.iter().enumerate() {
        let errors: Vec<f64> = rows.iter().map(|r| r.1[k] - cfg.horizon).collect();
        let s = Summary::of(&errors);
        let report = |name: &str, closed: f64| {
            MomentReport::new(
                name,
                cfg.horizon,
                m as f64,
                Some(cfg.hurst.value()),
                None,
                closed,
                s.variance,
                s.se_variance,
            )
        };
        let verbatim = report("rqv_variance", rqv_variance_equidistant(cfg.horizon, m, cfg.hurst));
        let adjusted = report(
            "rqv_variance_adjusted",
            rqv_variance_equidistant_adjusted(cfg.horizon, m, cfg.hurst),
        );
        summary.push(vec![
            cell(m),
            cell(verbatim.closed_form),
            cell(adjusted.closed_form),
            cell(s.variance),
            cell(s.se_variance),
            cell(verbatim.z_score),
            cell(adjusted.z_score),
        ]);
        diagnostics.push(format!(
            "n={m}: unit cross-term coefficient z = {:.2}, doubled cross-term z = {:.2}",
            verbatim.z_score, adjusted.z_score
        ));
        reports.push(verbatim);
        reports.push(adjusted);
    }
    let mut output = ExperimentOutput::new(cfg, ladder_records(&ladder, &rows), summary);
    output.reports = reports;
    output.diagnostics = diagnostics;
    Ok(output)
}

/// Mean, mean absolute and median error of realized QV on each level.
pub fn run_refinement(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (ladder, rows) = ladder_rqv(cfg)?;
    let mut summary = Table::new(&["n", "mean_error", "mean_abs_error", "median_error", "mad"]);
    let mut mean_abs = Vec::new();
    for (k, &m) in ladder.iter().enumerate() {
        let errors: Vec<f64> = rows.iter().map(|r| r.1[k] - cfg.horizon).collect();
        let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
        mean_abs.push(stats::mean(&abs));
        summary.push(vec![
            cell(m),
            cell(stats::mean(&errors)),
            cell(stats::mean(&abs)),
            cell(stats::median(&errors)),
            cell(stats::mad(&errors)),
        ]);
    }
    let mut output = ExperimentOutput::new(cfg, ladder_records(&ladder, &rows), summary);
    let decreasing = mean_abs.windows(2).all(|w| w[1] < w[0]);
    output.diagnostics.push(format!(
        "mean |RQV - T| across levels {}",
        if decreasing { "decreasing" } else { "not monotone" }
    ));
    Ok(output)
}

/// `x`-window `[−N, N]` for the Fubini check: `8σ` for Gaussian `ξ`, the
/// `1e-8` tail quantile otherwise.
fn fubini_cutoff(cfg: &ExperimentConfig) -> f64 {
    match cfg.xi.family() {
        RandomizerFamily::Gaussian { sigma } => 8.0 * sigma,
        _ => cfg.xi.tail_cutoff(1e-8),
    }
}

/// `I₁ = Σ_i w_i Σ_j φ_W(t_{j−1}, x_i) ΔB_j` and `I₂ = Σ_j (Σ_i w_i φ_W(t_{j−1}, x_i)) ΔB_j`
/// with `φ_W(t_m, x) = Σ_{k≤m} e^{ix(t_m − t_{k−1})} ΔW_k`.
pub fn fubini_pair(w: &SamplePath, b: &SamplePath, rule: &XQuadrature) -> (Complex64, Complex64) {
    let times = w.grid().times();
    let dw = w.increments();
    let db = b.increments();
    let n = dw.len();
    // phi[j][i] = φ_W(t_j, x_i), j = 0..n−1
    let mut phi = vec![vec![Complex64::new(0.0, 0.0); rule.len()]; n];
    for j in 1..n {
        let dt = times[j] - times[j - 1];
        for (i, &x) in rule.nodes.iter().enumerate() {
            let rotate = Complex64::from_polar(1.0, x * dt);
            phi[j][i] = rotate * (phi[j - 1][i] + dw[j - 1]);
        }
    }
    let i1: Complex64 = rule
        .weights
        .iter()
        .enumerate()
        .map(|(i, wi)| *wi * (0..n).map(|j| phi[j][i] * db[j]).sum::<Complex64>())
        .sum();
    let i2: Complex64 = (0..n)
        .map(|j| {
            let averaged: Complex64 = rule.weights.iter().zip(&phi[j]).map(|(wi, p)| *wi * p).sum();
            averaged * db[j]
        })
        .sum();
    (i1, i2)
}

/// Exchanging the `x`-quadrature and the pathwise sum on every replicate.
pub fn run_fubini_check(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let generator = FbmGenerator::new(Arc::new(TimeGrid::equidistant(cfg.horizon, cfg.n)?), cfg.hurst)?;
    let nodes = cfg.quad_nodes.unwrap_or(64);
    let cutoff = fubini_cutoff(cfg);
    let rule = XQuadrature::legendre_window(&cfg.xi, cutoff, nodes);
    let rows = per_replicate(cfg, |_, seed| {
        let w = sample_brownian(generator.grid(), seed);
        let b = generator.sample(seed);
        let (i1, i2) = fubini_pair(&w, &b, &rule);
        (seed, i1, i2, (i1 - i2).norm() / (1.0 + i1.norm()))
    })?;

    let mut records = Table::new(&["replicate", "seed", "i1_re", "i1_im", "i2_re", "i2_im", "deviation"]);
    let mut failures = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (i, (seed, i1, i2, dev)) in rows.iter().enumerate() {
        records.push(vec![
            cell(i),
            cell(seed.0),
            cell(i1.re),
            cell(i1.im),
            cell(i2.re),
            cell(i2.im),
            cell(dev),
        ]);
        max_dev = max_dev.max(*dev);
        if dev.is_nan() || *dev >= FUBINI_TOLERANCE {
            failures.push(format!("replicate {i} (seed {}): deviation {dev:e}", seed.0));
        }
    }
    let mut summary = Table::new(&[
        "replicates",
        "nodes",
        "cutoff",
        "max_deviation",
        "rounding_scale",
        "tolerance",
        "passed",
    ]);
    summary.push(vec![
        cell(cfg.replicates),
        cell(nodes),
        cell(cutoff),
        cell(max_dev),
        cell(cfg.n as f64 * nodes as f64 * f64::EPSILON),
        cell(FUBINI_TOLERANCE),
        cell(failures.is_empty()),
    ]);
    let mut output = ExperimentOutput::new(cfg, records, summary);
    output.failures = failures;
    Ok(output)
}
