//! Command implementations behind the `elastica` binary. Every command
//! returns a [`RunReport`] and optionally writes CSV, JSON and SVG
//! artifacts to an output directory.

pub mod commands;
pub mod output;
pub mod report;

use std::fmt;

pub use commands::{Context, Format};
pub use report::{Check, RunReport};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const NO_SOLUTION: i32 = 2;
    pub const INVALID: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug)]
pub enum Failure {
    Core(elastica_core::Error),
    Io(std::io::Error),
    Invalid(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        use elastica_core::Error as E;
        match self {
            Failure::Core(E::NoSolution { .. }) => exit::NO_SOLUTION,
            Failure::Core(E::Domain(_) | E::InvalidParameter(_) | E::GridMismatch(_) | E::Inadmissible(_)) => {
                exit::INVALID
            }
            Failure::Core(E::NonConvergence(_) | E::Instability(_)) => exit::NUMERICAL,
            Failure::Io(_) => exit::INVALID,
            Failure::Invalid(_) => exit::INVALID,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Invalid(m) => write!(f, "invalid arguments: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<elastica_core::Error> for Failure {
    fn from(e: elastica_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Exit code for a finished report: `constants` only reports, every other
/// command fails when one of its checks fails.
pub fn report_exit_code(r: &RunReport) -> i32 {
    if r.command == "constants" || r.all_pass() {
        exit::SUCCESS
    } else {
        exit::NUMERICAL
    }
}
