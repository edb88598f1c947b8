use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown functional id `{0}`")]
    UnknownFunctional(String),

    /// The divergence-form coefficient dropped below the ellipticity floor.
    #[error("ellipticity violated: coefficient {value:.3e} at r = {r:.6e} below floor {floor:.3e}")]
    Ellipticity { r: f64, value: f64, floor: f64 },

    #[error(
        "not enough shells to hold trace {lambda}: available weight {available}; \
         increase l_max or shells_per_channel"
    )]
    InsufficientShells { lambda: f64, available: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("decay fit window is empty: {0}")]
    EmptyWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
