//! `foldkit` command-line tool.
//!
//! Exit codes: 0 success, 1 result outside the requested tolerance, 2 bad
//! input, 3 numerical failure, 4 I/O failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Command;
use crate::config::ToolConfig;

#[derive(Debug, Parser)]
#[command(
    name = "foldkit",
    version,
    about = "Design and verification tools for elastic-band self-folding sheets"
)]
struct Cli {
    /// TOML config file; defaults to $FOLDKIT_CONFIG when set
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ToolConfig::load(cli.config.as_deref()).and_then(|config| cli.command.run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
