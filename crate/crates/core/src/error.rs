use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no admissible decay rate: bound evaluates to {0:e}")]
    NoAdmissibleRate(f64),

    #[error("inadmissible gain/coefficient combination: {0}")]
    Inadmissible(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero pivot at row {row} in tridiagonal elimination")]
    SingularCore { row: usize },

    #[error("singular rank-one update: 1 + vᵀA⁻¹u = {denominator:e}")]
    SingularUpdate { denominator: f64 },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("too few usable samples for a decay fit: {0}")]
    TooFewSamples(usize),

    #[error("meshes are not nested: {0}")]
    NonNested(String),

    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error at {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
