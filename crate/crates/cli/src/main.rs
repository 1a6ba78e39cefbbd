mod args;
mod commands;
mod error;
mod io;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

/// Size the global rayon pool from `CSR_THREADS` (unset or 0 = automatic).
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CSR_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("CSR_THREADS must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Denoise(a) => commands::denoise_cmd(a),
        Command::Synth(a) => commands::synth(a),
        Command::Gibbs(a) => commands::gibbs(a),
        Command::Reconstruct(a) => commands::reconstruct_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version exit 0; malformed invocations exit 2.
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("csr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
