//! Command-line front end for the conditioned-pointer engine: flag and
//! config-file resolution, deterministic JSON/CSV emission, and the batch
//! drivers behind sweeps and cross-checks.

pub mod commands;
pub mod config;
pub mod output;
pub mod pool;

use std::ffi::OsString;

use clap::Parser;

/// What a finished command hands back to the shell. Tolerance verdicts use
/// `code` (1 on failure) while still producing their full report.
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CommandOutput {
    pub fn ok(stdout: String) -> CommandOutput {
        CommandOutput { stdout, stderr: String::new(), code: 0 }
    }
}

/// Input problems. Everything here exits 2; numeric pass/fail verdicts never
/// take this path.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl core::fmt::Display for CliError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CliError::Invalid(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<orthoweak_core::Error> for CliError {
    fn from(e: orthoweak_core::Error) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

/// Parse, dispatch, report. Returns the process exit code instead of
/// exiting, so tests can drive it in-process.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(msg) = pool::check_env() {
        eprintln!("error: {msg}");
        return 2;
    }
    match commands::dispatch(cli) {
        Ok(out) => {
            if !out.stderr.is_empty() {
                eprint!("{}", out.stderr);
            }
            if !out.stdout.is_empty() {
                print!("{}", out.stdout);
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
