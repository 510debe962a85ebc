//! Command-line front end for `photocert`.
//!
//! Subcommands: `simulate`, `estimate`, `bound`, `keyrate` and `pipeline`
//! (all four in sequence). Exit codes are listed in [`error::exit`].

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use args::{Cli, Command};
use error::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Bound(a) => commands::bound(a),
        Command::Keyrate(a) => commands::keyrate(a),
        Command::Pipeline(a) => commands::pipeline(a),
    }
}
