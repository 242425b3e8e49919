use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A point or function was paired with an incompatible space.
    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("unsupported dynamics: {0}")]
    UnsupportedDynamics(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("tolerance {tol:e} is below the attainable resolution {min:e}")]
    Tolerance { tol: f64, min: f64 },

    /// A continuity or discontinuity precondition failed.
    #[error("guard violation: {0}")]
    Guard(String),

    #[error("fixed-point resolution exhausted: {0}")]
    ResolutionExhausted(String),
}
