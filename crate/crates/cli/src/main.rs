mod args;
mod commands;
mod common;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

fn run() -> CliResult {
    let argv = config::expand_args(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string().trim_end().to_string())),
    };
    common::at_least_one("threads", cli.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(&cli, a),
        Command::Compare(a) => commands::compare(&cli, a),
        Command::Parareal(a) => commands::parareal(&cli, a),
        Command::Cost(a) => commands::cost(a),
        Command::Schedule(a) => commands::schedule(a),
        Command::Gen(a) => commands::gen(&cli, a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pmsm: {e}");
            e.exit_code()
        }
    }
}
