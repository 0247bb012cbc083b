use newsvendor::bench::BenchError;
use newsvendor::dist::DistError;
use newsvendor::mc::McError;
use newsvendor::randopt::RandoptError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    MissingFile { path: String, message: String },
    #[error("invalid scenario at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    Config(String),
    #[error("numerical integrity check failed: {0}")]
    Integrity(String),
    #[error("{failed} of {total} checks outside the 4-standard-error band")]
    ValidationFailed {
        failed: usize,
        total: usize,
        /// Rendered result table.
        table: String,
    },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// Process exit status: 2 missing input file, 3 schema or configuration
    /// error, 4 numerical integrity failure, 5 validation failure, 1 for
    /// output errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingFile { .. } => 2,
            CliError::Schema { .. } | CliError::Config(_) => 3,
            CliError::Integrity(_) => 4,
            CliError::ValidationFailed { .. } => 5,
            CliError::Output { .. } => 1,
        }
    }

    pub(crate) fn config(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{context}: {err}"))
    }

    pub(crate) fn from_dist(context: &str, err: DistError) -> Self {
        match err {
            DistError::SampleFile { path, message } if !std::path::Path::new(&path).is_file() => {
                CliError::MissingFile { path, message }
            }
            other => CliError::config(context, other),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidMarket { .. } | BenchError::Unsupported { .. } => CliError::Config(e.to_string()),
            BenchError::Dist(_) | BenchError::Integrity { .. } => CliError::Integrity(e.to_string()),
        }
    }
}

impl From<RandoptError> for CliError {
    fn from(e: RandoptError) -> Self {
        match e {
            RandoptError::Bench(b) => b.into(),
            RandoptError::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Integrity(other.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        CliError::Config(e.to_string())
    }
}
