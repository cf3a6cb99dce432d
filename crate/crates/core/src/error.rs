use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point has a non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("direction of the zero vector is undefined")]
    ZeroVector,

    #[error("sensor index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("space is not strictly convex (p = {p})")]
    NotStrictlyConvex { p: f64 },

    #[error("inconsistent arrivals: t_w - t_b = {spread} exceeds 2 + {tol}")]
    InconsistentArrivals { spread: f64, tol: f64 },

    #[error("all coverands eliminated at level {level}")]
    NoSurvivors { level: u32 },

    #[error("family of {size} coverands at level {level} exceeds the configured limit")]
    FamilyOverflow { level: u32, size: usize },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn dims(expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch { expected, actual }
    }
}
