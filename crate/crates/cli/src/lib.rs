//! Command-line harness around `porestab`: configuration, scenario runs and manifests.

pub mod commands;
pub mod config;
pub mod manifest;

/// Exit status for invalid input.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for numerical failures and I/O trouble.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] porestab::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_VALIDATION,
            CliError::Model(e) if e.is_validation() => EXIT_VALIDATION,
            _ => EXIT_NUMERICAL,
        }
    }
}

// The guide's command-line chapter runs as a doctest.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
