//! Command-line errors and their exit statuses.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hypball::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// 2 for invalid input, 3 for numerical or validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_usage() => 2,
            _ => 3,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) if e.is_usage() => "usage",
            CliError::Core(hypball::Error::TailBound { .. }) => "tail_bound",
            CliError::Core(hypball::Error::Quadrature { .. }) => "quadrature",
            CliError::Core(hypball::Error::ContourNearZero { .. }) => "contour",
            CliError::Core(_) => "numerical",
            CliError::Io(_) => "io",
            CliError::Validation(_) => "validation",
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() }
        })
        .to_string()
    }
}
