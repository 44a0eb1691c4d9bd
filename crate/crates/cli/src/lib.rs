//! `qaforge` command line: argument parsing, dispatch and exit-code policy.
//!
//! Exit codes: `0` success, `1` usage error (usage text on stderr), `2`
//! runtime failure with a one-line `qaforge: error[<Kind>]: ...` reason.

mod args;
mod commands;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;

/// Outcome of a failed command.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination detected after parsing; reported like a clap error.
    Usage(String),
    /// Runtime failure; `kind` is a stable machine-readable tag.
    Runtime { kind: &'static str, message: String },
}

impl CliError {
    pub fn runtime(kind: &'static str, message: impl fmt::Display) -> Self {
        CliError::Runtime { kind, message: message.to_string() }
    }

    pub fn io(message: impl fmt::Display) -> Self {
        Self::runtime("IoError", message)
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    init_logging(cli.verbose);
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let mut cmd = <Cli as clap::CommandFactory>::command();
            let _ = cmd.error(ErrorKind::ArgumentConflict, msg).print();
            1
        }
        Err(CliError::Runtime { kind, message }) => {
            let one_line = message.replace('\n', " ");
            eprintln!("qaforge: error[{kind}]: {one_line}");
            2
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}
