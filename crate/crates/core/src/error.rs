// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::scalar::ParameterSpace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("outcome does not match model: {0}")]
    OutcomeMismatch(String),
    #[error("parameter outside the parameter space: {0}")]
    InvalidParameter(String),
    #[error("parameter spaces differ: {0} vs {1}")]
    ParameterSpaceMismatch(ParameterSpace, ParameterSpace),
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("likelihood is not strictly positive at {0}")]
    NonPositiveLikelihood(String),
    #[error("enumeration of {requested} sequences exceeds the cap of {cap}")]
    EnumerationTooLarge { requested: u128, cap: u128 },
    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not an SLP pair: {0}")]
    InvalidPair(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("noise stream ended after {0} draws")]
    NoiseExhausted(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
