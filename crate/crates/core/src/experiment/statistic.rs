// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::model::{Component, ExperimentModel};
use super::outcome::Outcome;
use crate::audit::{tb_statistic, BirnbaumExperiment, TbValue};
use crate::error::Result;

/// Value of the minimal sufficient statistic of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// R, the number of successes in a fixed number of trials.
    Successes(u32),
    /// N, the number of trials needed to reach the target successes.
    Trials(u32),
    NormalMean {
        mean: f64,
        n: u32,
    },
    /// The randomizer's indicator J together with the component statistic.
    Indexed {
        component: Component,
        inner: Box<Statistic>,
    },
    /// The index-erasing statistic of an enlarged experiment.
    Birnbaum(TbValue),
}

pub fn sufficient_statistic(model: &ExperimentModel, outcome: &Outcome) -> Result<Statistic> {
    outcome.validate_for(model)?;
    Ok(match (model, outcome.canonical()) {
        (ExperimentModel::Binomial { .. }, Outcome::BernoulliSummary { successes, .. }) => {
            Statistic::Successes(successes)
        }
        (ExperimentModel::NegBinomial { .. }, Outcome::BernoulliSummary { trials, .. }) => Statistic::Trials(trials),
        (
            ExperimentModel::NormalFixedN { .. } | ExperimentModel::NormalOptionalStopping { .. },
            Outcome::NormalSummary { mean, n },
        ) => Statistic::NormalMean { mean, n },
        (ExperimentModel::Mixture { .. }, Outcome::MixtureOutcome { component, inner }) => {
            let c = model.component(component).expect("validated");
            Statistic::Indexed {
                component,
                inner: Box::new(sufficient_statistic(c, &inner)?),
            }
        }
        (ExperimentModel::Birnbaumized { pair, weight_first }, Outcome::MixtureOutcome { component, inner }) => {
            let eb = BirnbaumExperiment::from_parts((**pair).clone(), *weight_first);
            Statistic::Birnbaum(tb_statistic(&eb, component, &inner)?)
        }
        _ => unreachable!("outcome validated against model"),
    })
}
