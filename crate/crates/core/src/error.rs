use thiserror::Error;

/// Error taxonomy shared by all modules.
///
/// `Usage`, `Domain` and `Statistics` mark bad requests (CLI exit code 2);
/// the remaining variants mark numerical failures (CLI exit code 3).
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("{0}")]
    Domain(String),

    /// API misuse (inconsistent flags, wrong label combination, ...).
    #[error("{0}")]
    Usage(String),

    /// Rotational quantum number forbidden by Bose-Einstein statistics.
    #[error("{0}")]
    Statistics(String),

    /// Grid too coarse to track an eigenvector through a crossing.
    #[error("{0}")]
    Refinement(String),

    /// Iterative solve failed to converge.
    #[error("{0}")]
    Convergence(String),

    /// Least-squares fit failed or is ill conditioned.
    #[error("{0}")]
    Fit(String),

    /// Level lists from two runs could not be matched one-to-one.
    #[error("{0}")]
    Pairing(String),

    /// Bound-state tail did not decay inside the maximum grid extension.
    #[error("{0}")]
    GridExtension(String),

    /// Malformed input file.
    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;


impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Usage(_) | Error::Statistics(_) | Error::Parse(_) => 2,
            Error::Refinement(_)
            | Error::Convergence(_)
            | Error::Fit(_)
            | Error::Pairing(_)
            | Error::GridExtension(_) => 3,
        }
    }

    /// Short machine-parsable kind tag used in stderr messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Usage(_) => "usage",
            Error::Statistics(_) => "statistics",
            Error::Refinement(_) => "refinement",
            Error::Convergence(_) => "convergence",
            Error::Fit(_) => "fit",
            Error::Pairing(_) => "pairing",
            Error::GridExtension(_) => "grid-extension",
            Error::Parse(_) => "parse",
        }
    }
}
