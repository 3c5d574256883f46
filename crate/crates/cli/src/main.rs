//! `gaussres`: separation sweeps, the global upper bound and validation suites
//! from the command line.
//!
//! Exit codes: 0 success, 2 invalid spec or usage, 3 engine or I/O error,
//! 4 validation failure.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussres::experiments::{
    run_sweep_with, run_validation_with, Suite, FORMAT_VERSION, TOOL_VERSION,
};
use gaussres::qfi::{qfi_upper_bound, CovarianceTransform, TildeIndexOrder};
use gaussres::{EngineConfig, GaussianPsf};
use thiserror::Error;

use config::{bound_config, sweep_config, BoundConfig, Overrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Engine(gaussres::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{failed} of {total} checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Engine(_) | CliError::Io { .. } => 3,
            CliError::Validation { .. } => 4,
        }
    }
}

impl From<gaussres::Error> for CliError {
    fn from(e: gaussres::Error) -> Self {
        match e {
            gaussres::Error::InvalidSpec(msg) => CliError::Spec(msg),
            other => CliError::Engine(other),
        }
    }
}

#[derive(Parser)]
#[command(name = "gaussres", version, about = "Quantum Fisher information for two-source separation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the QFI over a separation grid and write CSV.
    Sweep(SweepArgs),
    /// Evaluate the global upper bound over a separation grid and write CSV.
    Bound(BoundArgs),
    /// Run a validation suite and print the report.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum State {
    CorrelatedThermal,
    DisplacedThermal,
    Coherent,
    Squeezed,
}

impl State {
    fn kind(self) -> &'static str {
        match self {
            State::CorrelatedThermal => "correlated-thermal",
            State::DisplacedThermal => "displaced-thermal",
            State::Coherent => "coherent",
            State::Squeezed => "squeezed",
        }
    }
}

/// Channel, grid and output options shared by `sweep` and `bound`.
#[derive(Args)]
struct GridArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n0: Option<f64>,
    /// Transmission factor.
    #[arg(long)]
    kappa: Option<f64>,
    /// PSF width [default: 1].
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Logarithmic spacing.
    #[arg(long)]
    log_grid: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    state: Option<State>,
    /// Coherence modulus.
    #[arg(long)]
    gamma: Option<f64>,
    /// Coherence phase, radians.
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Squeezing-axis angle, radians.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Add the global upper bound column.
    #[arg(long)]
    with_bound: bool,
    /// Fidelity-oracle column, sampled every STRIDE rows.
    #[arg(long, value_name = "STRIDE")]
    with_oracle: Option<usize>,
    /// Worker threads (all cores when absent).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    Congruence,
    Similarity,
}

#[derive(Clone, Copy, ValueEnum)]
enum TildeOrder {
    Swapped,
    Direct,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Engine transform of the covariance derivative.
    #[arg(long, value_enum, default_value = "congruence")]
    transform: Transform,
    /// Pairing of the mode-derivative coefficients.
    #[arg(long, value_enum, default_value = "swapped")]
    tilde_order: TildeOrder,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Geometry,
    Symplectic,
    Oracle,
    Limits,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Geometry => Suite::Geometry,
            SuiteArg::Symplectic => Suite::Symplectic,
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Limits => Suite::Limits,
            SuiteArg::All => Suite::All,
        }
    }
}

fn overrides(g: &GridArgs) -> Overrides {
    Overrides {
        n0: g.n0,
        kappa: g.kappa,
        w: g.w,
        d_min: g.d_min,
        d_max: g.d_max,
        points: g.points,
        log_grid: g.log_grid,
        out: g.out.clone(),
        ..Overrides::default()
    }
}

/// Renders into memory, then writes `out` or stdout in one go.
fn emit(out: Option<&Path>, render: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    render(&mut buf).map_err(|source| CliError::Io { path: "<buffer>".into(), source })?;
    let write = |path: &Path| -> io::Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        f.write_all(&buf)?;
        f.flush()
    };
    match out {
        Some(path) => write(path).map_err(|source| CliError::Io { path: path.into(), source }),
        None => io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let o = Overrides {
        state: a.state.map(|s| s.kind().to_string()),
        gamma: a.gamma,
        phi: a.phi,
        theta: a.theta,
        with_bound: a.with_bound,
        with_oracle: a.with_oracle,
        threads: a.threads,
        ..overrides(&a.grid)
    };
    let cfg = sweep_config(a.grid.config.as_deref(), &o)?;
    log::info!("sweep: {} points of {}", cfg.spec.grid.points, cfg.spec.source.name());
    let result = run_sweep_with(&cfg.spec, &EngineConfig::default(), cfg.threads)?;
    emit(cfg.out.as_deref(), |buf| result.write_csv(buf))
}

fn write_bound(c: &BoundConfig, rows: &[(f64, f64)], out: &mut Vec<u8>) -> io::Result<()> {
    writeln!(out, "# format_version = {FORMAT_VERSION}")?;
    writeln!(out, "# tool = gaussres {TOOL_VERSION}")?;
    for (k, v) in [
        ("quantity", "upper-bound".to_string()),
        ("source.n0", format!("{:?}", c.n0)),
        ("channel.kappa", format!("{:?}", c.channel.kappa)),
        ("channel.w", format!("{:?}", c.channel.w)),
        ("grid.d_min", format!("{:?}", c.grid.d_min)),
        ("grid.d_max", format!("{:?}", c.grid.d_max)),
        ("grid.points", c.grid.points.to_string()),
        ("grid.log", c.grid.log.to_string()),
    ] {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "d_over_w,bound_w2,bound_w2_per_n0")?;
    for &(x, b) in rows {
        writeln!(out, "{x:.16e},{b:.16e},{:.16e}", b / c.n0)?;
    }
    Ok(())
}

fn bound(a: BoundArgs) -> Result<(), CliError> {
    let c = bound_config(a.grid.config.as_deref(), &overrides(&a.grid))?;
    let psf = GaussianPsf::new(c.channel.w)?;
    let w2 = c.channel.w * c.channel.w;
    let rows = c
        .grid
        .points()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            qfi_upper_bound(c.n0, c.channel.kappa, &psf, d)
                .map(|b| (d / c.channel.w, b * w2))
                .map_err(|e| CliError::Engine(gaussres::Error::SweepRow { row, d, source: Box::new(e) }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    emit(c.out.as_deref(), |buf| write_bound(&c, &rows, buf))
}

fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let cfg = EngineConfig {
        transform: match a.transform {
            Transform::Congruence => CovarianceTransform::Congruence,
            Transform::Similarity => CovarianceTransform::Similarity,
        },
        tilde_order: match a.tilde_order {
            TildeOrder::Swapped => TildeIndexOrder::Swapped,
            TildeOrder::Direct => TildeIndexOrder::Direct,
        },
        ..EngineConfig::default()
    };
    let report = run_validation_with(a.suite.into(), &cfg);
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Validation {
            failed: report.failures().count(),
            total: report.checks.len(),
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Bound(a) => bound(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaussres: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
