use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("mode {mode} is not part of a basis with {n_modes} modes")]
    InvalidMode { mode: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonator R{resonator} has zero detuning from the bus; the dispersive model is undefined")]
    ZeroDetuning { resonator: usize },

    #[error("distant resonators are not mutually resonant (max |δij| = {max_residual:.3e} rad/μs); integrate the amplitude equations instead")]
    NotResonant { max_residual: f64 },

    #[error("operator is not Hermitian (max |H - H†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm² = {norm_sqr:.12})")]
    NotNormalized { norm_sqr: f64 },

    #[error("occupation {0:?} is not in the basis")]
    UnknownBasisState(Vec<u32>),

    #[error("integration failed at t = {time} μs: {reason}")]
    StepFailure { time: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
