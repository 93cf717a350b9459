//! The `kruskal-cmc` command-line tool: configuration, file formats, SVG
//! rendering, and the subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

use cli::{Cli, Command};
use config::RunConfig;
pub use error::{CliError, Result};

/// Runs one invocation and returns the process exit status.
pub fn run(cli: &Cli) -> Result<u8> {
    let cfg = RunConfig::resolve(cli.global.config.as_deref(), &cli.global.overrides())?;
    match &cli.command {
        Command::Slice(args) => commands::slice(&cfg, args, cli.global.format),
        Command::Foliation(args) => commands::foliation(&cfg, args),
        Command::Locate(args) => commands::locate_point(&cfg, args),
        Command::Verify(args) => commands::verify(&cfg, args),
        Command::Plot(args) => commands::plot(&cfg, args, cli.global.m),
    }
}
