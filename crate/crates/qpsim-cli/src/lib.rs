//! Command-line front end for the quasi-probability circuit toolkit:
//! file formats, reports and the experiment harness.

pub mod experiments;
pub mod format;
pub mod reports;

/// Error split driving the process exit code: validation problems (bad flags,
/// malformed documents, domain violations) exit 2, internal failures exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl CliError {
    /// Core errors raised while computing on already-validated inputs.
    pub fn internal_core(e: qpsim_core::Error) -> Self {
        CliError::Internal(anyhow::anyhow!(e))
    }
}

impl From<format::FormatError> for CliError {
    fn from(e: format::FormatError) -> Self {
        CliError::Validation(e.to_string())
    }
}
