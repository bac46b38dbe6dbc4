use thiserror::Error;

/// Errors raised by the model, discretization and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative concentration {value:e} for species {species}")]
    NegativeConcentration { species: usize, value: f64 },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported construction: {0}")]
    UnsupportedConstruction(String),

    #[error("singular linearization: species {species} has zero concentration raised to a negative power")]
    SingularLinearization { species: usize },

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("negative concentration {value:e} for species {species} at t = {time}")]
    Positivity {
        time: f64,
        species: usize,
        value: f64,
    },

    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),

    #[error("step failed at t = {time}: {source}")]
    Step {
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config { .. }
            | Error::NegativeConcentration { .. }
            | Error::LengthMismatch { .. }
            | Error::Domain(_)
            | Error::UnsupportedConstruction(_)
            | Error::Precondition(_) => true,
            Error::Step { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { what, expected, got });
    }
    Ok(())
}
