// SPDX-License-Identifier: Apache-2.0

//! The worked examples as ready-made models and pairs.

use crate::error::Result;
use crate::experiment::{ExperimentModel, Outcome, Record, SlpPair};
use crate::stopping::slp_partner_for_stop;

/// Binomial trials fixed at 20 with 6 successes, against sampling until the
/// 6th success which arrives on trial 20.
pub fn example1_pair() -> SlpPair {
    example1_pair_with(20, 6).expect("valid example")
}

/// (Binomial{n}, r successes) paired with (NegBinomial{r}, N = n).
pub fn example1_pair_with(n: u32, r: u32) -> Result<SlpPair> {
    SlpPair::from_records(
        Record::new(ExperimentModel::binomial(n)?, Outcome::summary(r, n))?,
        Record::new(ExperimentModel::neg_binomial(r)?, Outcome::summary(r, n))?,
    )
}

/// Fixed n = 169 against optional stopping that first stops at n = 169.
pub fn example2_pair(sigma: f64) -> Result<SlpPair> {
    slp_partner_for_stop(169, sigma)
}

/// A fair coin chooses between instruments with variances 1e-4 and 1e4.
pub fn instruments_mixture() -> ExperimentModel {
    instruments_mixture_weighted(0.5).expect("valid example")
}

pub fn instruments_mixture_weighted(weight_first: f64) -> Result<ExperimentModel> {
    ExperimentModel::mixture(
        weight_first,
        ExperimentModel::normal_fixed_n(1, 1e-2)?,
        ExperimentModel::normal_fixed_n(1, 1e2)?,
    )
}

/// Every Bernoulli-family model the examples use.
pub fn bernoulli_models() -> Vec<ExperimentModel> {
    let bin20 = ExperimentModel::Binomial { n_trials: 20 };
    let nb6 = ExperimentModel::NegBinomial { r_target: 6 };
    vec![
        bin20.clone(),
        nb6.clone(),
        ExperimentModel::Binomial { n_trials: 1 },
        ExperimentModel::mixture(0.5, bin20.clone(), bin20.clone()).expect("valid"),
        ExperimentModel::mixture(0.5, bin20, nb6).expect("valid"),
        ExperimentModel::Birnbaumized {
            pair: Box::new(example1_pair()),
            weight_first: 0.5,
        },
    ]
}

/// Every normal-family model with a closed-form density.
pub fn normal_models() -> Vec<ExperimentModel> {
    vec![
        ExperimentModel::NormalFixedN { n: 169, sigma: 1.0 },
        ExperimentModel::NormalFixedN { n: 1, sigma: 1e-2 },
        ExperimentModel::NormalFixedN { n: 1, sigma: 1e2 },
        instruments_mixture(),
    ]
}
