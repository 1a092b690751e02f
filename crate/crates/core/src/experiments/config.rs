//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! experiment = convergence
//! seed = 42
//! H = 0.75
//! L-grid = 1, 10, 100, 1000
//! ```
//!
//! Keys are case-sensitive and unknown keys are rejected. Values given on
//! the command line are applied with [`ConfigBuilder::set`] and win over the
//! file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::gaussian_paths::{
    make_equidistant_grid, sample_brownian, sample_fbm, sample_mixed, Hurst, SamplePath, Seed,
};
use crate::periodogram::QuadratureSpec;
use crate::randomizer::RandomizerSpec;
use crate::{Error, Result};

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "H",
    "T",
    "n",
    "n-min",
    "L-grid",
    "replicates",
    "xi",
    "quad",
    "quad-nodes",
    "process",
    "threads",
    "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    RqvBias,
    RqvVariance,
    RandomizedBias,
    Fubini,
    Refinement,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::RqvBias => "rqv-bias",
            ExperimentKind::RqvVariance => "rqv-variance",
            ExperimentKind::RandomizedBias => "randomized-bias",
            ExperimentKind::Fubini => "fubini",
            ExperimentKind::Refinement => "refinement",
        }
    }

    /// Whether the grid sizes form a dyadic ladder `n-min, 2·n-min, …, n`.
    fn dyadic(self) -> bool {
        matches!(
            self,
            ExperimentKind::RqvBias | ExperimentKind::RqvVariance | ExperimentKind::Refinement
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "convergence" | "converge" => ExperimentKind::Convergence,
            "rqv-bias" | "bias" => ExperimentKind::RqvBias,
            "rqv-variance" | "variance" => ExperimentKind::RqvVariance,
            "randomized-bias" => ExperimentKind::RandomizedBias,
            "fubini" => ExperimentKind::Fubini,
            "refinement" | "refine" => ExperimentKind::Refinement,
            other => return Err(Error::invalid(format!("unknown experiment `{other}`"))),
        })
    }
}

/// Which process the paths are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    Mixed,
    Brownian,
    Fractional,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Mixed => "mixed",
            Process::Brownian => "brownian",
            Process::Fractional => "fbm",
        }
    }
}

impl FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(Process::Mixed),
            "brownian" | "bm" => Ok(Process::Brownian),
            "fbm" | "fractional" => Ok(Process::Fractional),
            other => Err(Error::invalid(format!("unknown process `{other}`"))),
        }
    }
}

/// How the randomized periodogram integrates over `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadChoice {
    /// The default rule for `ξ` where it resolves the kernel to `1e-6`,
    /// the exact characteristic function elsewhere.
    Auto,
    Fixed(QuadratureSpec),
}

impl fmt::Display for QuadChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadChoice::Auto => f.write_str("auto"),
            QuadChoice::Fixed(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: Seed,
    pub hurst: Hurst,
    pub horizon: f64,
    pub n: usize,
    pub n_min: usize,
    pub l_grid: Vec<f64>,
    pub replicates: usize,
    pub xi: RandomizerSpec,
    pub quad: QuadChoice,
    /// Overrides the node count of the quadrature rule (and of the Fubini
    /// `x`-grid).
    pub quad_nodes: Option<usize>,
    pub process: Process,
    /// Worker threads; 0 lets the pool decide. Never affects output.
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// `n`, `n-min`, `replicates` and `L-grid` when not configured.
    fn defaults(kind: ExperimentKind) -> (usize, usize, usize, Vec<f64>) {
        match kind {
            ExperimentKind::Convergence => (4096, 4096, 200, vec![1.0, 10.0, 100.0, 1000.0]),
            ExperimentKind::RqvBias => (32, 8, 10_000, Vec::new()),
            ExperimentKind::RqvVariance => (8, 8, 10_000, Vec::new()),
            ExperimentKind::RandomizedBias => (4096, 4096, 2000, vec![10.0]),
            ExperimentKind::Fubini => (256, 256, 20, Vec::new()),
            ExperimentKind::Refinement => (16_384, 16, 200, Vec::new()),
        }
    }

    /// The grid sizes studied: the dyadic ladder, or just `n`.
    pub fn ladder(&self) -> Vec<usize> {
        if !self.kind.dyadic() {
            return vec![self.n];
        }
        let mut out = vec![self.n_min];
        while *out.last().unwrap() < self.n {
            out.push(out.last().unwrap() * 2);
        }
        out
    }

    /// The quadrature spec a fixed rule resolves to, with `quad-nodes` applied.
    pub fn quadrature(&self) -> Option<QuadratureSpec> {
        match self.quad {
            QuadChoice::Auto => None,
            QuadChoice::Fixed(q) => Some(match (q.rule, self.quad_nodes) {
                (crate::QuadratureRule::Exact, _) | (_, None) => q,
                (_, Some(m)) => QuadratureSpec { nodes: m, ..q },
            }),
        }
    }

    /// `# key = value` lines describing everything that determines the output.
    /// `threads` and `out` are left out so the bytes do not depend on them.
    pub fn echo(&self) -> Vec<String> {
        let l_grid = self
            .l_grid
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut lines = vec![
            format!("experiment = {}", self.kind),
            format!("seed = {}", self.seed.0),
            format!("H = {}", self.hurst),
            format!("T = {}", self.horizon),
            format!("n = {}", self.n),
        ];
        if self.kind.dyadic() {
            lines.push(format!("n-min = {}", self.n_min));
        }
        if !self.l_grid.is_empty() {
            lines.push(format!("L-grid = {l_grid}"));
        }
        lines.push(format!("replicates = {}", self.replicates));
        lines.push(format!("xi = {}", self.xi));
        lines.push(format!("quad = {}", self.quad));
        if let Some(m) = self.quad_nodes {
            lines.push(format!("quad-nodes = {m}"));
        }
        lines.push(format!("process = {}", self.process.name()));
        lines.into_iter().map(|l| format!("# {l}")).collect()
    }
}

/// Raw key/value pairs awaiting validation.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    values: BTreeMap<String, String>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the file format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut builder = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(line, format!("line {}: expected `key = value`", lineno + 1))
            })?;
            builder.set(key.trim(), value.trim())?;
        }
        Ok(builder)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Sets or overrides one key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<&mut Self> {
        if !KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(self)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("`{v}`: {e}"))))
            .transpose()
    }

    /// Validates against `kind`; a configured `experiment` must agree with it.
    pub fn build(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        if let Some(k) = self.parsed::<ExperimentKind>("experiment")? {
            if k != kind {
                return Err(Error::config(
                    "experiment",
                    format!("config is for `{k}` but `{kind}` was requested"),
                ));
            }
        }
        let seed = self
            .parsed::<u64>("seed")?
            .ok_or_else(|| Error::config("seed", "required (no implicit seeding)"))?;
        let hurst = self.parsed::<f64>("H")?.unwrap_or(0.75);
        let hurst = Hurst::new(hurst).map_err(|e| Error::config("H", e.to_string()))?;
        let horizon = self.parsed::<f64>("T")?.unwrap_or(1.0);
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::config("T", format!("must be positive, got {horizon}")));
        }

        let (n_default, n_min_default, m_default, l_default) = ExperimentConfig::defaults(kind);
        let n = self.parsed::<usize>("n")?.unwrap_or(n_default);
        if n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        let n_min = self.parsed::<usize>("n-min")?.unwrap_or(n_min_default.min(n));
        if kind.dyadic() {
            if !n.is_power_of_two() {
                return Err(Error::config("n", format!("must be a power of two, got {n}")));
            }
            if !n_min.is_power_of_two() || n_min > n {
                return Err(Error::config("n-min", format!("must be a power of two <= n, got {n_min}")));
            }
        }

        let l_grid = match self.get("L-grid") {
            Some(v) => parse_l_grid(v)?,
            None => l_default,
        };
        if matches!(kind, ExperimentKind::Convergence | ExperimentKind::RandomizedBias) && l_grid.is_empty() {
            return Err(Error::config("L-grid", "must not be empty"));
        }

        let replicates = self.parsed::<usize>("replicates")?.unwrap_or(m_default);
        if replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        let xi = self
            .parsed::<RandomizerSpec>("xi")?
            .unwrap_or_else(|| RandomizerSpec::gaussian(1.0).expect("unit Gaussian"));
        let quad = match self.get("quad") {
            None | Some("auto") => QuadChoice::Auto,
            Some(_) => QuadChoice::Fixed(self.parsed::<QuadratureSpec>("quad")?.expect("present")),
        };
        let quad_nodes = self.parsed::<usize>("quad-nodes")?;
        if let Some(m) = quad_nodes {
            let min = if kind == ExperimentKind::Fubini { 1 } else { 3 };
            if m < min {
                return Err(Error::config("quad-nodes", format!("must be at least {min}, got {m}")));
            }
            if kind != ExperimentKind::Fubini && quad == QuadChoice::Auto {
                return Err(Error::config("quad-nodes", "needs an explicit `quad` rule"));
            }
        }
        let process = self.parsed::<Process>("process")?.unwrap_or(Process::Mixed);
        let mixed_only = matches!(
            kind,
            ExperimentKind::Convergence | ExperimentKind::RqvVariance | ExperimentKind::RandomizedBias
        );
        if mixed_only && process != Process::Mixed {
            return Err(Error::config("process", format!("`{kind}` supports only mixed paths")));
        }
        let threads = self.parsed::<usize>("threads")?.unwrap_or(0);
        let out = self.get("out").map(PathBuf::from);

        Ok(ExperimentConfig {
            kind,
            seed: Seed(seed),
            hurst,
            horizon,
            n,
            n_min,
            l_grid,
            replicates,
            xi,
            quad,
            quad_nodes,
            process,
            threads,
            out,
        })
    }
}

/// Settings for drawing a single path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub seed: Seed,
    pub hurst: Hurst,
    pub horizon: f64,
    pub n: usize,
    pub process: Process,
}

impl PathConfig {
    pub fn sample(&self) -> Result<SamplePath> {
        let grid = make_equidistant_grid(self.horizon, self.n)?;
        Ok(match self.process {
            Process::Brownian => sample_brownian(&grid, self.seed),
            Process::Fractional => sample_fbm(&grid, self.hurst, self.seed)?,
            Process::Mixed => sample_mixed(&grid, self.hurst, self.seed)?.mixed,
        })
    }

    pub fn echo(&self) -> Vec<String> {
        vec![
            format!("# seed = {}", self.seed.0),
            format!("# H = {}", self.hurst),
            format!("# T = {}", self.horizon),
            format!("# n = {}", self.n),
            format!("# process = {}", self.process.name()),
        ]
    }
}

impl ConfigBuilder {
    /// The path settings (`seed`, `H`, `T`, `n`, `process`); other keys are ignored.
    pub fn build_path(&self) -> Result<PathConfig> {
        let seed = self
            .parsed::<u64>("seed")?
            .ok_or_else(|| Error::config("seed", "required (no implicit seeding)"))?;
        let hurst = Hurst::new(self.parsed::<f64>("H")?.unwrap_or(0.75)).map_err(|e| Error::config("H", e.to_string()))?;
        let horizon = self.parsed::<f64>("T")?.unwrap_or(1.0);
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::config("T", format!("must be positive, got {horizon}")));
        }
        let n = self.parsed::<usize>("n")?.unwrap_or(1024);
        if n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        let process = self.parsed::<Process>("process")?.unwrap_or(Process::Mixed);
        Ok(PathConfig {
            seed: Seed(seed),
            hurst,
            horizon,
            n,
            process,
        })
    }
}

fn parse_l_grid(text: &str) -> Result<Vec<f64>> {
    let grid = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config("L-grid", format!("bad value `{}`", v.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    if grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::config("L-grid", "values must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("L-grid", "values must be strictly increasing"));
    }
    Ok(grid)
}
