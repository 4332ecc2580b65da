//! Command-line front end for `ca-backtrack-core`.

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod error;
pub mod json;

use args::{Cli, Command};
use commands::Report;
use error::CliError;

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Evolve(a) => commands::cmd_evolve(a),
        Command::Preimage(a) => commands::cmd_preimage(a),
        Command::Backtrack(a) => commands::cmd_backtrack(a),
        Command::Order(a) => commands::cmd_order(a),
        Command::Selftest(a) => commands::cmd_selftest(a),
    }
}

/// Where `--output` points, if anywhere.
pub fn output_path(cli: &Cli) -> Option<&std::path::Path> {
    match &cli.command {
        Command::Evolve(a) => a.output.as_deref(),
        Command::Preimage(a) => a.output.as_deref(),
        Command::Backtrack(a) => a.output.as_deref(),
        Command::Order(a) => a.output.as_deref(),
        Command::Selftest(a) => a.output.as_deref(),
    }
}
