use thiserror::Error;

/// Errors produced by the library.
///
/// The two broad classes matter for callers: `InvalidParameter`-style errors
/// mean the input never made sense (CLI maps these to exit code 1), while
/// `ToleranceNotMet`/`Overflow` mean a numeric procedure could not finish
/// within its budget (exit code 2).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} overflows the configured horizon at index {index}")]
    Overflow { what: &'static str, index: u64 },

    #[error("quadrature tolerance not met: requested {requested:e}, achieved {achieved:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("correlation spec is not positive semidefinite (pivot failed at index {index})")]
    NotPositiveSemidefinite { index: usize },

    #[error("exact enumeration too large: {size} support combinations exceed the cap of {cap}")]
    EnumerationTooLarge { size: u64, cap: u64 },

    #[error("transform is not nondecreasing on the support (at position {index})")]
    NonMonotoneTransform { index: usize },

    #[error("exact means unavailable: {reason}")]
    MeansUnavailable { reason: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Exit code the CLI should use for this error: 1 for validation
    /// problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ToleranceNotMet { .. } | Error::Overflow { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
