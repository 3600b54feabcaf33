use thiserror::Error;

pub type Result<T> = std::result::Result<T, GgmError>;

#[derive(Debug, Error)]
pub enum GgmError {
    #[error("index {index} out of range for dimension {dim}")]
    Dimension { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("conditioning submatrix is singular for set {set:?}")]
    SingularConditioning { set: Vec<usize> },

    #[error("non-positive conditional variance {value} for node {node}")]
    DegenerateDistribution { node: usize, value: f64 },

    #[error("perfect conditional correlation between nodes {i} and {j}")]
    PerfectCorrelation { i: usize, j: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("precision matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("model generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("at least {required} samples required, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle mode requires an exact covariance view and the true model")]
    OracleMisuse,

    #[error("node {node} has no undiscovered neighbors")]
    NoUndiscoveredNeighbors { node: usize },

    #[error("exhaustive check unsupported for dimension {n} (limit {limit})")]
    UnsupportedSize { n: usize, limit: usize },

    #[error("learner failed at round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<GgmError>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for GgmError {
    fn from(e: serde_json::Error) -> Self {
        GgmError::Parse(e.to_string())
    }
}
