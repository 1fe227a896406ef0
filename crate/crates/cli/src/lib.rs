//! Expression language and command dispatch for the `qmorse` binary.
//!
//! Every command writes JSON to stdout (or CSV with `--csv` where offered);
//! diagnostics go to stderr. Exit codes: 0 success, 2 parse/input error,
//! 3 domain error, 4 resource or cap overflow, 1 internal error.

pub mod commands;
pub mod expr;

use thiserror::Error;

pub use commands::{run, Cli};
pub use expr::{elaborate, elaborate_family, parse_expr, ElabError, Expr, ParseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Elab(ElabError),
    #[error("{0}")]
    Core(qmorse_core::Error),
    #[error("input error: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ElabError> for CliError {
    fn from(e: ElabError) -> Self {
        match e {
            ElabError::Core(c) => CliError::Core(c),
            other => CliError::Elab(other),
        }
    }
}

impl From<qmorse_core::Error> for CliError {
    fn from(e: qmorse_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qmorse_core::Error as E;
        match self {
            CliError::Parse(_) | CliError::Elab(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Core(E::Format(_)) => 2,
            CliError::Core(E::Domain(_)) => 3,
            CliError::Core(E::Resource(_)) => 4,
            CliError::Core(E::Internal(_)) => 1,
        }
    }
}
