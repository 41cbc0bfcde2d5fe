use thiserror::Error;

/// Errors raised by the sampler and its supporting modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("timestamp {got} does not follow previous timestamp {previous}")]
    Ordering { previous: f64, got: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reservoir holds {len} of {capacity} patterns")]
    ReservoirNotFull { len: usize, capacity: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: transaction utility {declared} differs from item sum {computed}")]
    UtilityMismatch {
        line: usize,
        declared: f64,
        computed: f64,
    },

    #[error("instance norm {norm} exceeds enumeration guard {limit}")]
    EnumerationGuard { norm: usize, limit: usize },

    #[error("pattern law undefined: total utility mass is zero")]
    ZeroMass,
}

pub type Result<T> = std::result::Result<T, Error>;
