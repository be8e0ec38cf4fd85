use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ddmagsim::run::{run, threads_from_env, Invocation, THREADS_ENV};

/// Monte Carlo polarization simulator for waveplate-decoupled fiber magnetometry.
#[derive(Debug, Parser)]
#[command(name = "ddmagsim", version = ddmagsim::run::REVISION)]
struct Cli {
    /// fidelity-vs-separation, signal-vs-detuning, rotation-vs-length, heatmap or single-run
    experiment: String,
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path (default: <experiment>.csv).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    realizations: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = Invocation {
        experiment: cli.experiment,
        config: cli.config,
        overrides: cli.set,
        out: cli.out,
        seed: cli.seed,
        realizations: cli.realizations,
    };
    let outcome = threads_from_env(std::env::var(THREADS_ENV).ok().as_deref())
        .and_then(|threads| run(&inv, threads));
    match outcome {
        Ok((path, rows)) => {
            println!("wrote {rows} rows to {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ddmagsim: {e}");
            ExitCode::FAILURE
        }
    }
}
