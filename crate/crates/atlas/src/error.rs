use thiserror::Error;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("computation aborted: {0}")]
    Computation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AtlasError {
    /// Process exit status: 1 for bad input, 3 for an aborted computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            AtlasError::Config(_) => 1,
            AtlasError::Computation(_) | AtlasError::Io(_) => 3,
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> AtlasError {
    AtlasError::Config(msg.into())
}
