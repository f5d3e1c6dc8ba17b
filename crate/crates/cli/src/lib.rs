//! Command-line front end: parses a run configuration, dispatches a
//! verification campaign and writes a JSON (or CSV grid) report.
//!
//! Exit codes: 0 all checks pass, 1 some check fails (report still
//! written), 2 usage or invalid input, 3 numerical non-convergence, 4 I/O.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaigns;
pub mod config;
pub mod report;
pub mod suite;

use std::fmt;

pub use config::{parse_args, Command, Format, RunConfig};
pub use report::{CheckResult, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// `--help` or `--version`; the text goes to stdout with exit 0.
    Help(String),
    Usage(String),
    /// Inputs that parse but are mathematically unusable for the campaign.
    Model(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => EXIT_PASS,
            CliError::Usage(_) | CliError::Model(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Help(s) | CliError::Usage(s) => f.write_str(s.trim_end()),
            CliError::Model(s) => write!(f, "invalid input: {s}"),
            CliError::Numerical(s) => write!(f, "numerical failure: {s}"),
            CliError::Io(s) => write!(f, "I/O error: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fraceq::Error> for CliError {
    fn from(e: fraceq::Error) -> Self {
        use fraceq::Error as E;
        match e {
            E::NonConvergence(_) | E::Overflow(_) | E::Divergence(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

/// The outcome of a campaign before it is written anywhere.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub grids: Vec<report::GridTable>,
}

/// Runs the campaign selected by `config` and returns the report.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Eqdist => campaigns::eqdist(config),
        Command::Characterize => campaigns::characterize(config),
        Command::Taylor => campaigns::taylor(config),
        Command::Mvt => campaigns::mvt(config),
        Command::Order => campaigns::order(config),
        Command::Actuarial => campaigns::actuarial(config),
        Command::Suite => suite::run_suite(config),
    }
}

/// Runs, writes the report and maps the result to an exit code.
pub fn run(config: &RunConfig) -> i32 {
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fraceq: {e}");
            return e.exit_code();
        }
    };
    let written = match report::emit(&outcome.report, &outcome.grids, config) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("fraceq: {e}");
            return e.exit_code();
        }
    };
    let failures = outcome.report.failures();
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "{}: {} checks, {} failed",
        config::name(config.command),
        outcome.report.results.len(),
        failures
    );
    if failures == 0 {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
