// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    InvalidInput(#[from] slplab_core::Error),
    #[error("internal invariant failed: {0}")]
    Invariant(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serialization(String),
}

impl CliError {
    /// 0 success, 2 invalid input or usage, 3 internal invariant failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::InvalidInput(_) => 2,
            CliError::Invariant(_) | CliError::Io(_) | CliError::Serialization(_) => 3,
        }
    }
}
