//! Batch command-line front end: fit a tree, apply it, visualize it, audit it.
//!
//! Exit codes are a total function of the terminal state:
//!
//! | code | meaning                                       |
//! |------|-----------------------------------------------|
//! | 0    | optimal (or command completed)                |
//! | 1    | internal error                                |
//! | 2    | stopped at a time/gap/round limit             |
//! | 3    | infeasible                                    |
//! | 64   | usage error (bad flags)                       |
//! | 65   | data error (files, schemas, shapes)           |

mod args;
mod commands;
mod loader;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

pub(crate) const EXIT_OK: u8 = 0;
pub(crate) const EXIT_INTERNAL: u8 = 1;
pub(crate) const EXIT_LIMIT: u8 = 2;
pub(crate) const EXIT_INFEASIBLE: u8 = 3;
pub(crate) const EXIT_USAGE: u8 = 64;
pub(crate) const EXIT_DATA: u8 = 65;

/// Command-level failure carrying its process exit code.
#[derive(Debug)]
pub(crate) struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn data(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<optree::DataError> for CliError {
    fn from(e: optree::DataError) -> CliError {
        CliError::data(e.to_string())
    }
}

impl From<optree::FitError> for CliError {
    fn from(e: optree::FitError) -> CliError {
        use optree::FitError;
        match e {
            FitError::Infeasible => CliError {
                code: EXIT_INFEASIBLE,
                message: "no tree satisfies the constraints".into(),
            },
            FitError::NoIncumbent => CliError {
                code: EXIT_LIMIT,
                message: "limit reached before any feasible tree was found".into(),
            },
            FitError::InvalidDataset(_)
            | FitError::InvalidConfig(_)
            | FitError::Fairness(_)
            | FitError::Robustness(_)
            | FitError::Scores(_)
            | FitError::DivisionHazard(_)
            | FitError::Plan(_) => CliError::data(e.to_string()),
            other => CliError::internal(other.to_string()),
        }
    }
}

impl From<optree::PlanError> for CliError {
    fn from(e: optree::PlanError) -> CliError {
        CliError::data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::data(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::from(EXIT_OK)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
    };

    let outcome = match cli.command {
        Command::Fit(a) => commands::fit::run(a),
        Command::Predict(a) => commands::predict::run(a),
        Command::Visualize(a) => commands::visualize::run(a),
        Command::Evaluate(a) => commands::evaluate::run(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
