use alloc::string::String;

/// Errors raised by the algebra, array, solver and design layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Shapes or counts do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A configuration value is missing or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// A matrix factorization failed (not positive definite, singular, ...).
    #[error("factorization error: {0}")]
    Factorization(String),
    /// A precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A metric cannot be computed from the given data.
    #[error("metric undefined: {0}")]
    Metric(String),
    /// Direction recovered from a root is not unique (grating lobes).
    #[error("ambiguous direction: {0}")]
    Ambiguity(String),
    /// The conic solver did not reach an optimal point.
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
