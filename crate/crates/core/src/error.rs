use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KfpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("region selects no grid nodes")]
    EmptyRegion,

    #[error("cylinder leaves the grid domain")]
    CylinderOutsideDomain,

    #[error("empty sample set")]
    EmptySamples,

    #[error("coincident sample pair at index {0}")]
    CoincidentPair(usize),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular linear system (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("too few admissible pairs: {0} (need at least 10)")]
    TooFewPairs(usize),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for KfpError {
    fn from(e: std::io::Error) -> Self {
        KfpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, KfpError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(KfpError::DimensionMismatch { expected, got })
    }
}
