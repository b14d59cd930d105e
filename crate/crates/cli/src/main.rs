//! `lfr-stoch`: compare series/parallel LFR systems, run the regression
//! matrix, search for counterexamples and cross-check with Monte Carlo.
//!
//! Standard output carries JSON only; progress and diagnostics go to
//! standard error. Exit codes: 0 ok, 2 input error, 3 violated or mismatch,
//! 4 inconclusive, 5 search exhausted.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Exit, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compare(a) => commands::compare(a),
        Command::Regress(a) => commands::regress(a),
        Command::Search(a) => commands::search(a),
        Command::Mc(a) => commands::mc(a),
        Command::Run(a) => commands::run(a),
    };
    let code = match result {
        Ok(exit) => exit,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            Exit::Input
        }
    };
    ExitCode::from(code as u8)
}
