//! Command-line front end for `sensyn`.

pub mod args;
pub mod commands;
pub mod json;
pub mod svg;
pub mod table;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Plot(a) => commands::plot(a),
    }
}
