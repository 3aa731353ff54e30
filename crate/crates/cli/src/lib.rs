//! `fecraft` command line: run sessions, apply accepted scripts, benchmark
//! them and serve the review API.

pub mod api;
mod commands;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{Cli, Command};

/// Exit status for flag and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for data, schema and script errors.
pub const EXIT_DATA: i32 = 3;
/// Exit status for LLM backend failures.
pub const EXIT_LLM: i32 = 4;
/// Exit status for everything else.
pub const EXIT_INTERNAL: i32 = 5;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
