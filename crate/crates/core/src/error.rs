use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integral did not converge: {0}")]
    NonIntegrable(String),

    #[error("tilted law is not a probability: E|b+cM|^alpha - 1 = {residual:e}")]
    TiltNotNormalized { residual: f64 },

    #[error("no Kesten index below max_alpha = {max_alpha}")]
    NoRootInRange { max_alpha: f64 },

    #[error("coordinate {coordinate}: E log|b+cM| = {log_moment:.6} is not negative")]
    StationarityViolated { coordinate: usize, log_moment: f64 },

    #[error("coordinates {higher} and {lower}: c_j/c_i >= b_j/b_i fails for alpha_i > alpha_j")]
    CaseOrderingViolated { higher: usize, lower: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("only {found} records above the threshold, need at least {required}")]
    InsufficientExceedances { found: usize, required: usize },

    #[error("expected dimension {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("spectral component of the zero vector")]
    ZeroVector,

    #[error("lag {lag} exceeds the collected window {horizon}")]
    WindowTooShort { lag: usize, horizon: usize },

    #[error("constant a_{index} = {value} is not positive")]
    NonPositiveConstant { index: usize, value: f64 },

    #[error("degenerate sample: all top order statistics are equal")]
    DegenerateSample,

    #[error("first passage not reached within {cap} steps")]
    PassageTimeout { cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
