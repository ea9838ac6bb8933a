use thiserror::Error;

/// Errors raised by the factorizations, subspace measures and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular value iteration did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("rank error: {0}")]
    Rank(String),

    #[error("gap error: {0}")]
    Gap(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("singular triangular factor: diagonal entry {index} is zero")]
    Singular { index: usize },

    #[error("polynomial error: {0}")]
    Polynomial(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }

    /// Errors that stem from the experiment setup rather than from a numerical outcome.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Gap(_) | Error::Dimension { .. } | Error::Parse(_) | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
