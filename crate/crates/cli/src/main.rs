//! Command-line front end: training, sampling, baselines, scoring and the
//! exact-posterior oracle.
//!
//! Exit codes: 0 success, 1 internal error, 2 input error, 3 mismatch between
//! the mention sets of a prediction and the corpus.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// A problem with the user's input that is not a library error.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<hddcrp::Error>() {
            return match e {
                hddcrp::Error::UniverseMismatch(_) => 3,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::TrainDistance(a) => commands::train_distance(a),
        Command::Sample(a) => commands::sample(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::Score(a) => commands::score_cmd(a),
        Command::OraclePosterior(a) => commands::oracle_posterior(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
