//! `rpqv`: simulate mixed Brownian / fractional Brownian paths and run the
//! quadratic-variation experiments.
//!
//! Exit status: 0 on success, 2 on usage or configuration errors, 1 on
//! numerical failures (including a failed Fubini check).

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rpqv_core::experiments::{self, format_float, ConfigBuilder, ExperimentKind, ExperimentOutput};
use rpqv_core::periodogram::{periodogram, randomized_periodogram, QuadratureSpec, SELF_CHECK_TOLERANCE};
use rpqv_core::{Error, SamplePath};

#[derive(Parser)]
#[command(name = "rpqv", version, about = "Quadratic variation of mixed fractional Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one sample path as `t,value` CSV.
    Simulate(Common),
    /// Periodogram of a path at one frequency, or the randomized periodogram
    /// over `--L-grid`.
    Periodogram {
        #[command(flatten)]
        common: Common,
        /// Frequency λ.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        lambda: f64,
        /// Read the path from a CSV written by `simulate` instead of drawing one.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Randomized periodogram against T over the L-grid.
    Converge(Common),
    /// Monte Carlo bias against its closed form.
    Bias {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Estimator::Rqv)]
        estimator: Estimator,
    },
    /// Monte Carlo variance of the realized-QV error against its closed forms.
    Variance(Common),
    /// Exchange of the randomizer quadrature and the pathwise sum.
    Fubini(Common),
    /// Realized QV over nested dyadic partitions of one path.
    Refine(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    /// Realized quadratic variation over the dyadic ladder.
    Rqv,
    /// Randomized periodogram over the L-grid.
    Randomized,
}

/// Flags shared by every subcommand; each overrides the config key of the same name.
#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed (required here or in the config).
    #[arg(long)]
    seed: Option<String>,
    /// Hurst index in (1/2, 1).
    #[arg(long = "H")]
    hurst: Option<String>,
    /// Horizon T.
    #[arg(long = "T")]
    horizon: Option<String>,
    /// Grid intervals (finest level for dyadic studies).
    #[arg(long)]
    n: Option<String>,
    /// Coarsest level of the dyadic ladder.
    #[arg(long = "n-min")]
    n_min: Option<String>,
    /// Comma-separated bandwidths L, strictly increasing.
    #[arg(long = "L-grid")]
    l_grid: Option<String>,
    /// Monte Carlo replicates.
    #[arg(long)]
    replicates: Option<String>,
    /// Randomizer: gaussian:σ | uniform:a | laplace:β.
    #[arg(long)]
    xi: Option<String>,
    /// Quadrature: auto | gauss-hermite[:m] | simpson[:m] | exact.
    #[arg(long)]
    quad: Option<String>,
    /// Node count of the quadrature rule.
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<String>,
    /// Path process: mixed | brownian | fbm.
    #[arg(long)]
    process: Option<String>,
    /// Worker threads (0 = all cores); never changes the output.
    #[arg(long)]
    threads: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    fn builder(&self) -> Result<ConfigBuilder, Error> {
        let mut b = match &self.config {
            Some(path) => ConfigBuilder::read(path)?,
            None => ConfigBuilder::new(),
        };
        let overrides = [
            ("seed", &self.seed),
            ("H", &self.hurst),
            ("T", &self.horizon),
            ("n", &self.n),
            ("n-min", &self.n_min),
            ("L-grid", &self.l_grid),
            ("replicates", &self.replicates),
            ("xi", &self.xi),
            ("quad", &self.quad),
            ("quad-nodes", &self.quad_nodes),
            ("process", &self.process),
            ("threads", &self.threads),
            ("out", &self.out),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                b.set(key, v.clone())?;
            }
        }
        Ok(b)
    }
}

/// Failure classes with their exit codes.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            Error::Numerical(_) | Error::Io { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Numerical(format!("write failed: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    let (common, kind) = match command {
        Command::Simulate(common) => return simulate(&common),
        Command::Periodogram { common, lambda, input } => return run_periodogram(&common, lambda, input),
        Command::Converge(c) => (c, ExperimentKind::Convergence),
        Command::Bias { common, estimator } => (
            common,
            match estimator {
                Estimator::Rqv => ExperimentKind::RqvBias,
                Estimator::Randomized => ExperimentKind::RandomizedBias,
            },
        ),
        Command::Variance(c) => (c, ExperimentKind::RqvVariance),
        Command::Fubini(c) => (c, ExperimentKind::Fubini),
        Command::Refine(c) => (c, ExperimentKind::Refinement),
    };
    let cfg = common.builder()?.build(kind)?;
    let output = experiments::run(&cfg)?;
    emit(&output, cfg.out.as_deref())?;
    for line in &output.diagnostics {
        eprintln!("{line}");
    }
    if output.passed() {
        Ok(())
    } else {
        Err(Failure::Numerical(output.failures.join("; ")))
    }
}

fn emit(output: &ExperimentOutput, out: Option<&std::path::Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            for file in output.write_files(path)? {
                eprintln!("wrote {}", file.display());
            }
            Ok(())
        }
        None => output.write(io::stdout().lock()).map_err(io_failure),
    }
}

fn simulate(common: &Common) -> Result<(), Failure> {
    let b = common.builder()?;
    let settings = b.build_path()?;
    let path = settings.sample()?;
    let mut buf = Vec::new();
    for line in settings.echo() {
        writeln!(buf, "{line}").map_err(io_failure)?;
    }
    path.write_csv(&mut buf).map_err(io_failure)?;
    write_out(b.get("out"), &buf)
}

fn write_out(target: Option<&str>, bytes: &[u8]) -> Result<(), Failure> {
    match target {
        Some(file) => std::fs::write(file, bytes).map_err(|source| {
            Failure::from(Error::Io {
                path: file.into(),
                source,
            })
        }),
        None => io::stdout().lock().write_all(bytes).map_err(io_failure),
    }
}

fn run_periodogram(common: &Common, lambda: f64, input: Option<PathBuf>) -> Result<(), Failure> {
    let b = common.builder()?;
    let path = match input {
        Some(file) => {
            let text = std::fs::read_to_string(&file).map_err(|source| {
                Failure::Usage(Error::Io { path: file.clone(), source }.to_string())
            })?;
            SamplePath::read_csv(&text)?
        }
        None => b.build_path()?.sample()?,
    };
    let mut buf = Vec::new();
    match b.get("L-grid") {
        None => writeln!(buf, "{}", format_float(periodogram(&path, lambda))).map_err(io_failure)?,
        Some(_) => {
            // reuse the experiment validation for L-grid, xi and quad
            let mut probe = b.clone();
            probe.set("seed", b.get("seed").unwrap_or("0").to_string())?;
            probe.remove("process");
            probe.remove("experiment");
            let cfg = probe.build(ExperimentKind::Convergence)?;
            writeln!(buf, "L,randomized_periodogram,self_check,nodes,quad").map_err(io_failure)?;
            for &l in &cfg.l_grid {
                let (q, r) = match cfg.quadrature() {
                    Some(q) => (q, randomized_periodogram(&path, l, &cfg.xi, &q)?),
                    None => {
                        let q = QuadratureSpec::default_for(&cfg.xi);
                        let r = randomized_periodogram(&path, l, &cfg.xi, &q)?;
                        if r.passes(SELF_CHECK_TOLERANCE) {
                            (q, r)
                        } else {
                            let exact = QuadratureSpec::exact();
                            (exact, randomized_periodogram(&path, l, &cfg.xi, &exact)?)
                        }
                    }
                };
                let f = format_float;
                writeln!(buf, "{},{},{},{},{q}", f(l), f(r.value), f(r.self_check), r.nodes)
                    .map_err(io_failure)?;
            }
        }
    }
    write_out(b.get("out"), &buf)
}
