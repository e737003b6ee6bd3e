use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("improper subset: {0}")]
    ImproperSubset(&'static str),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{count} malformed line(s); first at line {first_line}: {first_message}")]
    ParseReport {
        count: usize,
        first_line: usize,
        first_message: String,
    },

    #[error("snapshot {index} (t = {time}): {source}")]
    Snapshot {
        index: usize,
        time: i64,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
