use thiserror::Error;

/// Error type for every fallible operation in the crate.
///
/// [`Error::exit_code`] maps each variant onto the process exit codes used by
/// the `gmob` binary: 1 for malformed input, 2 for numerical indecision,
/// 3 for a verification failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    #[error("domain error: {func} undefined or non-smooth at {value}")]
    DomainError { func: String, value: f64 },

    #[error("derivative order {requested} exceeds available order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("metric is degenerate at the evaluation point (|det| = {det:.3e})")]
    DegenerateMetric { det: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("numerical rank indecision: singular values {above:.3e} and {below:.3e} straddle the tolerance with gap ratio {ratio:.2} < 10")]
    RankIndecision { above: f64, below: f64, ratio: f64 },

    #[error("eigenvalue clustering indecision near {value}")]
    ClusterIndecision { value: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("sampling failed: could not find a non-degenerate point in the sample box after {attempts} attempts")]
    SamplingFailed { attempts: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 malformed input, 2 numerical
    /// indecision, 3 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Malformed(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::RankIndecision { .. }
            | Error::ClusterIndecision { .. }
            | Error::SamplingFailed { .. }
            | Error::DomainError { .. }
            | Error::OrderExceeded { .. }
            | Error::DegenerateMetric { .. } => 2,
            Error::Verification(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
