use thiserror::Error;

/// Failures of a lab command, split by process exit code.
#[derive(Debug, Error)]
pub enum LabError {
    /// Unreadable, unparsable or invalid configuration, or an unusable output location.
    #[error("config error: {0}")]
    Config(String),
    /// The computation itself failed (integrator breakdown, degenerate data).
    #[error("numerical failure: {0}")]
    Numerical(#[from] lax_markov_core::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(context: &str, e: impl std::fmt::Display) -> Self {
        LabError::Config(format!("{context}: {e}"))
    }
}

pub type LabResult<T> = Result<T, LabError>;
