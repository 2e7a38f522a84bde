use thiserror::Error;

/// Errors surfaced by the statistical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid request (dimension guards, missing calibration).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed to converge to its stated tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A statistic is undefined for the given data (e.g. zero variance).
    #[error("undefined statistic: {0}")]
    Degenerate(String),

    /// The constrained fit is infeasible or the data degenerate.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
