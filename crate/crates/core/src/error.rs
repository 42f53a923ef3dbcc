use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or scenario parameter violates its invariant.
    #[error("{field}: {rule}")]
    InvalidParameter { field: String, rule: String },

    #[error("transform argument must be >= 0, got {0}")]
    NegativeArgument(f64),

    #[error("unstable: {0}")]
    Unstable(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("simulation aborted: {0}")]
    SimulationAborted(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("process specs do not match the scenario that produced the path")]
    SpecMismatch,

    #[error("malformed report: {0}")]
    MalformedReport(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
