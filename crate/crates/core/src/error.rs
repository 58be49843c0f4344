use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request exceeds a hard resource bound (e.g. state enumeration size).
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A spectrum is singular or too ill-conditioned for the operation.
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    /// A simulated flow diverged.
    #[error("unstable dynamics: {0}")]
    Instability(String),

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input file or table does not match the expected schema.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// A topology identifier is not in the catalog.
    #[error("unknown topology: {0}")]
    UnknownTopology(String),
}

pub type Result<T> = std::result::Result<T, Error>;
