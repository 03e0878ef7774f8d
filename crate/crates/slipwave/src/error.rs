use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("ill-conditioned system at xi = {xi:?} ({mode}): condition estimate {condition:.3e}")]
    IllConditioned {
        xi: Vec<f64>,
        mode: String,
        condition: f64,
    },

    #[error("singular system at xi = {xi:?} ({mode})")]
    Singular { xi: Vec<f64>, mode: String },

    #[error("surface symbol vanishes at nonzero frequency xi = {xi:?}")]
    VanishingSymbol { xi: Vec<f64> },

    #[error("flattening map is not a diffeomorphism: min J = {min_j:.3e}")]
    NotDiffeomorphism { min_j: f64 },

    #[error("left contraction ball at iteration {iteration}: {reason}")]
    LeftBall { iteration: usize, reason: String },

    #[error("no convergence after {iterations} iterations; residual trace {trace:?}")]
    NoConvergence { iterations: usize, trace: Vec<f64> },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("insufficient frequency range: {0}")]
    InsufficientRange(String),
}
