use clap::{Parser, ValueEnum};
use slipwave_cli::{load, run, ExperimentKind, Status};
use std::path::PathBuf;
use std::process::ExitCode;

/// Traveling free-surface flow over a Navier-slip bottom.
///
/// Exit codes: 0 success, 1 usage or configuration error, 2 solver failure,
/// 3 verification failure.
#[derive(Debug, Parser)]
#[command(name = "slipwave", version)]
struct Cli {
    /// Experiment to run; overrides `experiment.kind`.
    #[arg(value_enum)]
    experiment: Option<Experiment>,
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set params.alpha=0.01`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads (default: all hardware threads).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    /// Surface symbols m and rho on the lattice.
    Symbols,
    /// One linear solve.
    SolveLinear,
    /// Nonlinear traveling-wave solve.
    Solve,
    /// Slip solutions along alpha against the no-slip solution.
    SweepAlpha,
    /// Invariant suite; exits 3 if any check fails.
    Verify,
}

impl Experiment {
    fn kind(self) -> ExperimentKind {
        match self {
            Experiment::Symbols => ExperimentKind::Symbols,
            Experiment::SolveLinear => ExperimentKind::SolveLinear,
            Experiment::Solve => ExperimentKind::Solve,
            Experiment::SweepAlpha => ExperimentKind::SweepAlpha,
            Experiment::Verify => ExperimentKind::Verify,
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("slipwave: {msg}");
    ExitCode::from(Status::UsageError.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(Status::UsageError.exit_code());
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return usage_error("--threads must be at least 1");
        }
        if !slipwave::parallel::configure_threads(n) && cfg!(feature = "parallel") {
            return usage_error("could not size the worker pool");
        }
    }
    let cfg = match load(cli.config.as_deref(), &cli.set, cli.experiment.map(|e| e.kind())) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    if cli.print_config {
        return match toml::to_string(&cfg.echo) {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => usage_error(e),
        };
    }
    match run(&cfg) {
        Ok(status) => {
            eprintln!("slipwave {}: {:?}; summary in {}", cfg.kind.name(), status, cfg.json_path.display());
            ExitCode::from(status.exit_code())
        }
        Err(e) => usage_error(e),
    }
}
