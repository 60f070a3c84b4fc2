use std::path::PathBuf;

/// Errors produced by the simulator, the training procedures and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("symbol index {0} is outside 1..=16")]
    SymbolOutOfRange(usize),

    #[error("invalid layer sizes {0:?}: need at least two positive entries")]
    InvalidLayerSizes(Vec<usize>),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("NaN gradient at parameter {index}")]
    NanGradient { index: usize },

    #[error("training diverged at update {update}: loss = {loss}")]
    Diverged { update: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed parameter snapshot: {0}")]
    Snapshot(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
