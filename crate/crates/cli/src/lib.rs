//! Command-line front end: ingest bid files, simulate, fit, select and
//! diagnose. Reports are JSON tagged with [`report::SCHEMA`]; plot data is
//! headered CSV.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod units;

use std::ffi::OsString;

use clap::Parser;

pub use error::{CliError, Result};

/// Parses `argv` and runs the command. Help and version requests print
/// and return exit code 0; everything else that fails yields a JSON error
/// object on stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
