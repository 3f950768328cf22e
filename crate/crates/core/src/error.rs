use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A tester or sampler precondition on (k, ε₁, ε₂, τ, δ) does not hold.
    #[error("parameter precondition violated: {0}")]
    Parameter(String),
    #[error("matrix is not unitary (max |U†U - I| entry = {0:e})")]
    NotUnitary(f64),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("projected cost of {projected} controlled-U applications exceeds the ceiling of {ceiling}")]
    Budget { projected: u128, ceiling: u128 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
