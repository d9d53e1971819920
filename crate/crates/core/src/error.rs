use crate::chebyshev::TargetClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate time value {time}")]
    DuplicateTime { time: f64 },

    #[error("non-finite value in row {index}")]
    NonFinite { index: usize },

    #[error("at least 3 observations are required, got {n}")]
    TooFew { n: usize },

    #[error("invalid interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The basis columns are numerically linearly dependent.
    #[error("Gram matrix is numerically singular")]
    DegenerateGram,

    #[error("basis vector is not monotone")]
    NonMonotoneBasis,

    #[error("points are collinear, no exponential with nonzero rate interpolates them")]
    CollinearPoints,

    #[error("values are not strictly monotone")]
    NonMonotone,

    #[error("optimizer budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("objective failed at {point:?}: {source}")]
    Objective { point: Vec<f64>, source: Box<Error> },

    /// The max-norm best approximation is a constant or does not exist.
    #[error("degenerate target: {}", .0.name())]
    DegenerateTarget(Box<TargetClass>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateTime { .. } => "DuplicateTime",
            Error::NonFinite { .. } => "NonFinite",
            Error::TooFew { .. } => "TooFew",
            Error::InvalidInterval { .. } => "InvalidInterval",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateGram => "DegenerateGram",
            Error::NonMonotoneBasis => "NonMonotoneBasis",
            Error::CollinearPoints => "CollinearPoints",
            Error::NonMonotone => "NonMonotone",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::Objective { .. } => "ObjectiveError",
            Error::DegenerateTarget(_) => "DegenerateTarget",
            Error::Parse { .. } => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}
