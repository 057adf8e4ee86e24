use thiserror::Error;

/// Errors produced by the shape-space, potential, dynamics and analysis code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate shape: hyper-radius {0:e} is zero (triple collision)")]
    DegenerateShape(f64),

    #[error("triple collision: all three bodies coincide")]
    TripleCollision,

    #[error("Newton singularity: bodies {0} and {1} coincide (separation {2:e})")]
    Singularity(usize, usize, f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("collision approach at t = {t}: bodies {i} and {j} within {separation:e}")]
    CollisionApproach {
        t: f64,
        i: usize,
        j: usize,
        separation: f64,
    },

    #[error("requested end time {t_end} exceeds max_time {max_time}")]
    MaxTimeExceeded { t_end: f64, max_time: f64 },

    #[error("step budget of {0} steps exhausted")]
    TooManySteps(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported orbit: {0}")]
    UnsupportedOrbit(String),

    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("refinement diverged (residual {0:e})")]
    Divergence(f64),

    #[error("unknown orbit `{0}`")]
    UnknownOrbit(String),

    #[error("catalog parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
