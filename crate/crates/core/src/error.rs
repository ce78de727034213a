use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "noncommutative parameter {theta_eff} outside the singularity-free window (0, {limit}) for radius {a}"
    )]
    OutOfWindow { a: f64, theta_eff: f64, limit: f64 },

    #[error("mismatched operands: {0}")]
    Mismatch(String),

    #[error("coefficient at level {0} is zero; star inverse does not exist")]
    ZeroCoefficient(u64),

    #[error("operation requires half dimension {expected}, got {got}")]
    HalfDim { expected: u32, got: u32 },

    #[error("series diverges (estimated decay exponent {exponent:.3})")]
    Divergent { exponent: f64 },

    #[error("tolerance {tol:e} not reached before level {levels} (error estimate {estimate:e})")]
    ToleranceNotReached { tol: f64, levels: u64, estimate: f64 },

    #[error("truncated matrix is singular")]
    Singular,

    #[error("pole: {0}")]
    Pole(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ode step failure at r = {r}: {reason}")]
    StepFailure { r: f64, reason: String },

    #[error("ode residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
}

impl Error {
    /// Errors caused by the caller's input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::OutOfWindow { .. } | Error::HalfDim { .. } | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
