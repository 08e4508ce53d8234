use thiserror::Error;

use crate::engine::RunRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("GPR fit failed: {0}")]
    Fit(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("objective returned a non-finite value after {} evaluations", .record.evaluations_used())]
    NonFiniteObjective { record: Box<RunRecord> },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "{what}: expected dimension {expected}, got {got}"
        )))
    }
}
