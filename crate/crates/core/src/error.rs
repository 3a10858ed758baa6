use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("basis index {index} outside [{min}, {max}]")]
    IndexOutOfRange { index: i64, min: i64, max: i64 },

    #[error("point {value} is outside (0, 1]")]
    PointOutOfDomain { value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} is {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("stacked normal-equation system is singular")]
    SingularSystem,

    #[error("empirical Gram matrix is singular")]
    SingularGram,

    #[error("confidence level {0} is not in (0, 1)")]
    InvalidLevel(f64),

    #[error("noise variance must be non-negative")]
    NegativeNoise,

    #[error("sample has zero variance in coordinate {coordinate}")]
    DegenerateSample { coordinate: usize },

    #[error("nothing to draw")]
    EmptyInput,

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("need at least 10 rows to fit, found {n}")]
    TooFewRows { n: usize },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("unknown estimator '{0}'")]
    UnknownEstimator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
