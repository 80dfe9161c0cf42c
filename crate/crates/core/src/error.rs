use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown function {name:?}; available: {}", available.join(", "))]
    UnknownFunction { name: String, available: Vec<String> },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation produced {what} at {at}")]
    Evaluation { what: String, at: String },

    #[error("invalid sampling schedule: {0}")]
    InvalidSchedule(String),

    #[error("{name} has no {oracle} oracle")]
    MissingOracle { name: String, oracle: &'static str },

    #[error("{name} is not tagged {tag}")]
    MissingTag { name: String, tag: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inf + (-inf) is undefined")]
    IndeterminateSum,

    #[error("Cauchy tail at {singular} did not settle after {stages} stages")]
    Divergent { singular: f64, stages: usize },

    #[error("additivity failed: pieces sum to {pieces}, whole interval gives {whole}")]
    Additivity { pieces: f64, whole: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub(crate) fn point_string(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}
