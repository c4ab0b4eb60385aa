use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("problem too large: {0}")]
    Capacity(String),

    #[error("eigensolver did not converge (residual {residual:e}): {message}")]
    Convergence { residual: f64, message: String },

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("accuracy target missed: {0}")]
    Accuracy(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integration became unstable: {0}")]
    Stability(String),

    #[error("experiment unusable: {0}")]
    Unusable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Capacity(_) => "capacity",
            Error::Convergence { .. } => "convergence",
            Error::Domain(_) => "domain",
            Error::Accuracy(_) => "accuracy",
            Error::Numerical(_) => "numerical",
            Error::Stability(_) => "stability",
            Error::Unusable(_) => "unusable",
        }
    }
}
