use thiserror::Error;

/// Errors raised by the posterior computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or integral did not reach its tolerance.
    #[error("{what} did not converge (last estimate {estimate:e}, error estimate {error_bound:e})")]
    Convergence {
        what: String,
        estimate: f64,
        error_bound: f64,
    },

    /// The historical data make the initial-prior update improper.
    #[error("improper prior: {0}")]
    ImproperPrior(String),

    /// The design matrix does not have full column rank.
    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Zero or boundary counts; a continuity correction would be needed.
    #[error("continuity correction required: {0}")]
    ContinuityCorrection(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NotPositiveDefinite)
    }

    /// Renames the failed computation of a convergence error.
    pub fn context(self, what: impl Into<String>) -> Self {
        match self {
            Error::Convergence {
                estimate, error_bound, ..
            } => Error::Convergence {
                what: what.into(),
                estimate,
                error_bound,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
