// SPDX-License-Identifier: Apache-2.0

//! Exact experiment models and sampling-theory evidence for the strong
//! likelihood principle.
//!
//! The crate is organised bottom-up:
//!
//! - [`experiment`]: experiment models, outcomes, likelihoods, sufficient
//!   statistics, the sufficiency factorization and SLP-pair detection.
//! - [`evidence`]: p-value assessments that always name the sampling
//!   distribution they were computed under.
//! - [`audit`]: the enlarged (Birnbaumized) experiment, the index-erasing
//!   statistic and the premise-by-premise audit of the SP + WCP → SLP argument.
//! - [`stopping`]: Monte Carlo machinery for optional stopping.
//!
//! Bernoulli-family probabilities are exact rationals throughout. The
//! normal family uses `f64`.

pub mod audit;
pub mod catalog;
pub mod error;
pub mod evidence;
pub mod experiment;
pub mod normal;
pub mod scalar;
pub mod stopping;

pub use error::{Error, Result};
pub use scalar::{ParamValue, ParameterSpace, Scalar};
