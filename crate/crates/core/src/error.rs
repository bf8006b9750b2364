use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ray origin lies inside the set")]
    OriginInsideSet,

    #[error("time {t} is past the end of a non-periodic graph schedule")]
    ScheduleExhausted { t: f64 },

    #[error(
        "UJSC check is undecidable for a non-periodic schedule; \
         mark the schedule periodic or restrict to an explicit horizon"
    )]
    UjscUndecidable,

    #[error("state diverged at t = {t} (|x| = {norm:.3e})")]
    Diverged { t: f64, norm: f64 },

    #[error("solver did not converge in {max_iter} iterations (last residual {residual:.3e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("set family has an empty intersection; use the objective-based diagnostics instead")]
    EmptyIntersection,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
