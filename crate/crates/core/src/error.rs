use thiserror::Error;

/// Failures reported by the solvers and post-processing routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("steady state not reached after {steps} steps (update rate {rate:.3e})")]
    NotConverged { steps: usize, rate: f64 },

    #[error("truncation domain too small: {0}")]
    DomainTooSmall(String),

    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("non-finite or blown-up values: {0}")]
    NonFinite(String),

    #[error("ill-conditioned bordered system (estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("coordinate {coordinate} outside profile range [{min}, {max}]")]
    OutOfProfileRange { coordinate: f64, min: f64, max: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("insufficient points: need {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("no zero crossing in column x = {x}")]
    NoCrossing { x: f64 },

    #[error("{count} zero crossings in column x = {x}")]
    MultipleCrossings { x: f64, count: usize },

    #[error("|M_psi| = {0:.3e} too small to divide by")]
    DegenerateMpsi(f64),

    #[error("eigensolve failed: {0}")]
    EigensolveFailure(String),

    #[error("sweep has no baseline: {0}")]
    MissingBaseline(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
