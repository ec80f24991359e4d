use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Eve's symbol is ambiguous at (a, b) = ({a}, {b})")]
    AmbiguousEve { a: usize, b: usize },
    #[error("P_AB is nonzero at ({a}, {b}), which is not a diagram cell")]
    SupportMismatch { a: usize, b: usize },
    #[error("distribution is not unambiguous")]
    NotUnambiguous,
    #[error("symmetric eigensolver did not converge after {sweeps} sweeps")]
    EigenFailure { sweeps: usize },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no start reached a feasible point (best residual {best_residual:e})")]
    NoFeasiblePoint { best_residual: f64 },
    #[error("grid {d_a}x{d_b} exceeds the enumeration guard of {limit}x{limit}")]
    SizeGuard {
        d_a: usize,
        d_b: usize,
        limit: usize,
    },
    #[error("no diagram with {d_e} cliques is consistent with P_AB")]
    NoneFound { d_e: usize },
    #[error("map is not a classical isometry: inputs {first} and {second} share output {output}")]
    NotIsometry {
        first: usize,
        second: usize,
        output: usize,
    },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
