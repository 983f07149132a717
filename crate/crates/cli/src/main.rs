//! `atslab` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a
//! numerical routine fails. `ATSLAB_THREADS` caps the worker pool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprintln!("{}", e.render());
                    eprintln!("{}", Cli::command().render_help());
                    ExitCode::from(1)
                }
                _ => {
                    eprintln!("{}", e.render());
                    ExitCode::from(1)
                }
            };
        }
    };

    if let Ok(v) = std::env::var("ATSLAB_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                atslab::par::init_threads(n);
            }
            _ => {
                eprintln!("error: ATSLAB_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
