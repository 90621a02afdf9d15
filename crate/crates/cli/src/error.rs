//! Failures with a stable process exit code.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    /// Missing, unreadable or malformed input, or a bad setting.
    #[error("input error: {0}")]
    Input(String),
    /// Nothing to build a model from.
    #[error("empty model: {0}")]
    EmptyModel(String),
    /// Two inputs that must line up do not.
    #[error("schema mismatch: {0}")]
    Schema(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::EmptyModel(_) => 3,
            Failure::Schema(_) => 4,
        }
    }
}

/// Exit code for any error a command returns: the code of a [`Failure`]
/// in its chain, otherwise 1.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    e.chain()
        .find_map(|c| c.downcast_ref::<Failure>())
        .map_or(1, Failure::exit_code)
}
