use thiserror::Error;

/// Errors raised by construction, validation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),

    #[error("probability masses sum to {sum}, expected 1 within 1e-12")]
    MassSum { sum: f64 },

    #[error("non-finite or NaN value in {0}")]
    NanValue(String),

    #[error("negative probability mass {0}")]
    NegativeMass(f64),

    #[error("distribution has no atoms")]
    EmptyDistribution,

    #[error("{name} = {value} is outside {range}")]
    ProbabilityRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid step function: {0}")]
    InvalidStep(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("atom x = {x} of distribution #{index} is not on the x-grid")]
    OffGrid { index: usize, x: f64 },

    #[error("map is not strictly increasing on probe grid: f({a}) = {fa} >= f({b}) = {fb}")]
    NotStrictlyIncreasing { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedJson(_) => "MALFORMED_JSON",
            Error::MassSum { .. } => "MASS_SUM",
            Error::NanValue(_) => "NAN_VALUE",
            Error::NegativeMass(_) => "NEGATIVE_MASS",
            Error::EmptyDistribution => "EMPTY_DISTRIBUTION",
            Error::ProbabilityRange { .. } => "PROBABILITY_RANGE",
            Error::InvalidStep(_) => "INVALID_STEP",
            Error::InvalidKernel(_) => "INVALID_KERNEL",
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::OffGrid { .. } => "OFF_GRID",
            Error::NotStrictlyIncreasing { .. } => "NOT_STRICTLY_INCREASING",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Io(_) => "IO",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedJson(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
