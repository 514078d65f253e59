//! `rkrlw`: run simulations, refinement studies and invariant checks.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rkrlw::exact::Branch;
use rkrlw::study::Axis;

use commands::Failure;

#[derive(Parser)]
#[command(name = "rkrlw", version, about = "Conservative finite-difference solver for the generalized Rosenau-Kawahara-RLW equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write solution, energy and summary files
    Simulate { config: PathBuf },
    /// Refinement study against the solitary wave
    Converge {
        config: PathBuf,
        #[arg(long)]
        axis: Axis,
        /// Comma-separated, strictly decreasing mesh parameters
        #[arg(long)]
        levels: String,
    },
    /// Print the travelling-wave parameters and their residuals
    ExactInfo {
        config: PathBuf,
        /// Root of the B² quadratic; defaults to the config's `branch`
        #[arg(long)]
        branch: Option<Branch>,
    },
    /// Run the randomized invariant suites
    PropertyCheck {
        #[arg(long, default_value_t = rkrlw::properties::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = rkrlw::properties::DEFAULT_SAMPLES)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate { config } => commands::simulate(&config),
        Command::Converge { config, axis, levels } => commands::converge(&config, axis, &levels),
        Command::ExactInfo { config, branch } => commands::exact_info(&config, branch),
        Command::PropertyCheck { seed, samples } => commands::property_check(seed, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Property => 3,
        }
    }
}
