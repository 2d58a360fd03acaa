use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base map is not invertible; negative times are not available")]
    NonInvertible,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a {point} point does not belong to the phase space of a {system} map")]
    WrongPointKind { system: &'static str, point: &'static str },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid sampling function: {0}")]
    InvalidSampling(String),

    #[error("sampling function must be real-valued here")]
    NotReal,

    #[error("orbit of length {requested} exceeds the {available} steps resolved by this phase point")]
    PrecisionExhausted { requested: i64, available: i64 },

    #[error("empty block")]
    EmptyBlock,

    #[error("block is not gauge-reduced (off-diagonal must be real and non-negative)")]
    NotGaugeReduced,

    #[error("off-diagonal entry {index} is not strictly positive")]
    NonPositiveOffdiag { index: usize },

    #[error("energy {energy} lies within {tol:e} of an eigenvalue")]
    EnergyTooCloseToSpectrum { energy: f64, tol: f64 },

    #[error("energy {energy} lies within {tol:e} of the spectrum of the block")]
    EnergyTooCloseToBlockSpectrum { energy: f64, tol: f64 },

    #[error("solution vanishes exactly at site {index}")]
    SolutionHitsEigenvalue { index: i64 },

    #[error("cocycle is singular at orbit site {site} (off-diagonal sampling function vanishes)")]
    SingularCocycle { site: i64 },

    #[error("cocycle has complex entries; gauge-reduce the off-diagonal first")]
    ComplexCocycle,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error{}: {message}", at_pointer(pointer))]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn at_pointer(pointer: &str) -> String {
    if pointer.is_empty() {
        String::new()
    } else {
        format!(" at {pointer}")
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
