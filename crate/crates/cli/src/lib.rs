//! Command-line front end for `nmdrive-core`: scenario configuration,
//! single runs, driven-vs-undriven comparison, parameter sweeps, and
//! CSV/JSON/SVG emission.

pub mod args;
pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod measures;
pub mod output;
pub mod plot;
pub mod sweep;

pub use args::Cli;
pub use error::{CliError, Result};

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

/// Parse `argv` and run. Help and version text go to `stdout` and count as
/// success.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::input(msg.trim_start_matches("error: ").trim_end()));
        }
    };
    commands::dispatch(&cli, stdout)
}
