// SPDX-License-Identifier: Apache-2.0

//! Experiment models, outcomes and their likelihoods.

mod factorization;
mod likelihood;
mod model;
mod normalization;
mod outcome;
mod slp;
mod statistic;

pub use factorization::{verify_factorization, FactorizationReport, SliceReport, SliceSelection, ENUMERATION_CAP};
pub use likelihood::{likelihood_kernel, log_pmf, pmf, LikelihoodKernel};
pub use model::{Component, ExperimentModel};
pub use normalization::{normalization_check, NormalizationReport};
pub use outcome::Outcome;
pub use slp::{check_slp_pair, default_grid, Record, SlpPair, SLP_RELATIVE_TOLERANCE};
pub use statistic::{sufficient_statistic, Statistic};

pub(crate) use likelihood::binomial_coefficient;
pub(crate) use model::weight_in_open_unit;
