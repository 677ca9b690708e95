use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample space mismatch: {left} atoms vs {right} atoms")]
    SpaceMismatch { left: usize, right: usize },
    #[error("fiber vector is not based at the expected point")]
    BaseMismatch,
    #[error("length {got} does not match sample space size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weight {value:e} at atom {index} is not strictly positive")]
    NonPositive { index: usize, value: f64 },
    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("value at atom {index} is not finite")]
    NonFinite { index: usize },
    #[error("vector has mean {mean:e} under its base, expected 0")]
    NotCentered { mean: f64 },
    #[error("invalid sample space: {0}")]
    InvalidSpace(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("linear system is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("state left the open simplex at step {step} (min weight {min_weight:e})")]
    PositivityBreach { step: usize, min_weight: f64 },
    #[error("no convergence after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("parameter diverged at step {step} (norm {norm:e})")]
    Diverged { step: usize, norm: f64 },
}
