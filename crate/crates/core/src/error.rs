use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not in the span of the algebra basis (residual {residual:.3e})")]
    OutOfAlgebra { residual: f64 },

    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),

    #[error("retraction is numerically singular (condition number {condition:.3e})")]
    SingularRetraction { condition: f64 },

    #[error("group element is outside the injectivity domain of the retraction")]
    OutsideInjectivityDomain,

    #[error("Legendre transform is singular: {0}")]
    LegendreSingular(String),

    #[error("trajectory reached the barrier singular set (gap {gap:.3e})")]
    BarrierSingular { gap: f64 },

    #[error("subspace splitting relation violated: {0}")]
    SplittingViolated(String),

    #[error("Newton iteration did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("solver exceeded {iterations} iterations (residual {residual:.3e})")]
    MaxItersExceeded { residual: f64, iterations: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
