//! `idesim`: config-driven experiments for integrodifference equations.

mod commands;
mod config;
mod error;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::RunContext;
use config::RunConfig;
use error::CliError;

const VERSION: &str = env!("IDESIM_BUILD_VERSION");

#[derive(Parser)]
#[command(
    name = "idesim",
    version = VERSION,
    about = "Simulate integrodifference equations and reproduce their attractor experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV artifacts and run metadata.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 1 guarantees byte-identical artifacts across runs.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the Beverton-Holt alpha (convergence runs a single column).
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the reference resolution.
    #[arg(long = "n-ref")]
    n_ref: Option<usize>,
    /// Override the pullback depth s.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a forward trajectory and write it as CSV.
    Simulate(Common),
    /// Approximate pullback-attractor witnesses per level.
    Pullback(Common),
    /// Empirical convergence rates of pullback witnesses (rate table).
    Convergence(Common),
    /// Forward orbits of an asymptotically autonomous Ricker model against
    /// the fixed point of its frozen limit.
    ForwardLimit(Common),
    /// Run the randomized invariant suites and report pass/fail counts.
    CheckInvariants(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c)
            | Command::Pullback(c)
            | Command::Convergence(c)
            | Command::ForwardLimit(c)
            | Command::CheckInvariants(c) => c,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let threads = common.threads.unwrap_or_else(num_threads_default);
    if threads == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;

    let mut config = RunConfig::load(&common.config)?;
    if let Some(n_ref) = common.n_ref {
        config.discretization.n_ref = n_ref;
    }
    if let Some(depth) = common.depth {
        config.experiment.depth = depth;
    }

    let ctx = RunContext { config, out_dir: common.out.clone(), threads, version: VERSION };
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&ctx),
        Command::Pullback(_) => commands::pullback(&ctx),
        Command::Convergence(c) => commands::convergence(&ctx, c.alpha),
        Command::ForwardLimit(_) => commands::forward_limit(&ctx),
        Command::CheckInvariants(_) => commands::check_invariants(&ctx),
    }
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
