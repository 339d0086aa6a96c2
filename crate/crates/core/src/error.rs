use thiserror::Error;

/// Errors raised by scoring, estimation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A record did not match the expected schema.
    #[error("malformed record: {0}")]
    Schema(String),

    #[error("probabilities do not form a simplex vector: {0}")]
    Simplex(String),

    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("ensemble must contain at least {required} member(s), got {found}")]
    EnsembleTooSmall { required: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("NaN encountered in {0}")]
    NaN(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Quadrature or optimisation did not reach the requested accuracy.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NaN(what));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be finite")));
    }
    Ok(())
}
