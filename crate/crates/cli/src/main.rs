//! `beltrami-lab`: build initial data, run Hall MHD simulations, check the
//! acceptance suites and solve the helicity-constrained minimization.
//!
//! Exit codes: 0 ok, 1 verify failure, 2 usage or config error, 3 numerical
//! failure, 4 infeasible optimization.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(
    name = "beltrami-lab",
    version,
    about = "Double Beltrami Hall MHD workbench"
)]
struct Cli {
    /// Configuration file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `init.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for relative output paths (created if missing).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured initial state to a checkpoint.
    Init,
    /// Integrate to `time.t_end`, writing diagnostics CSV and checkpoints.
    Simulate,
    /// Run an acceptance suite: algebra, exact, conservation, stability,
    /// theorem23, variational or all.
    Verify {
        suite: String,
        /// Viscosity for the closed-form reference (negative control).
        #[arg(long)]
        reference_nu: Option<f64>,
        /// Comma-separated check ids to run, e.g. `4a,5a`.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
    /// Minimize energy under the configured helicity constraints.
    Minimize,
    /// Fit an exponential decay rate to one CSV column.
    DecayFit {
        /// Diagnostics CSV.
        #[arg(long)]
        csv: PathBuf,
        /// Column name, e.g. `E_u`.
        #[arg(long)]
        column: String,
        /// Fit window `T0,T1`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected T0,T1, got '{s}'"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad window start '{a}'"))?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad window end '{b}'"))?;
    if !(a < b) {
        return Err(format!("window start {a} must be below end {b}"));
    }
    Ok((a, b))
}

fn set_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("BELTRAMI_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "BELTRAMI_LAB_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    set_threads()?;
    let ctx = commands::Context {
        config: cli.config,
        seed: cli.seed,
        output: cli.output,
    };
    match cli.command {
        Command::Init => commands::init(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Verify {
            suite,
            reference_nu,
            only,
        } => commands::verify(&suite, reference_nu, only),
        Command::Minimize => commands::minimize(&ctx),
        Command::DecayFit {
            csv,
            column,
            window,
        } => commands::decay_fit(&csv, &column, window),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
