// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{Component, ExperimentModel};
use crate::error::{Error, Result};
use crate::stopping::boundary;

/// Observed data. Summaries are canonical; sequences are validated and
/// reduced to summaries where only the summary matters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Individual Bernoulli trials in order, each 0 or 1.
    BernoulliSeq {
        bits: Vec<u8>,
    },
    BernoulliSummary {
        successes: u32,
        trials: u32,
    },
    NormalSummary {
        mean: f64,
        n: u32,
    },
    /// An outcome of a compound experiment: the randomizer's indicator plus
    /// the component's outcome.
    MixtureOutcome {
        component: Component,
        inner: Box<Outcome>,
    },
}

impl Outcome {
    pub fn sequence(bits: impl Into<Vec<u8>>) -> Self {
        Outcome::BernoulliSeq { bits: bits.into() }
    }

    pub fn summary(successes: u32, trials: u32) -> Self {
        Outcome::BernoulliSummary { successes, trials }
    }

    pub fn normal(mean: f64, n: u32) -> Self {
        Outcome::NormalSummary { mean, n }
    }

    pub fn mixture(component: Component, inner: Outcome) -> Self {
        Outcome::MixtureOutcome {
            component,
            inner: Box::new(inner),
        }
    }

    /// Successes and failures of a Bernoulli outcome.
    pub fn tally(&self) -> Option<(u32, u32)> {
        match self {
            Outcome::BernoulliSeq { bits } => {
                let successes = bits.iter().filter(|&&b| b == 1).count() as u32;
                Some((successes, bits.len() as u32 - successes))
            }
            Outcome::BernoulliSummary { successes, trials } => Some((*successes, trials.saturating_sub(*successes))),
            _ => None,
        }
    }

    /// The summary form: sequences collapse to their success/trial counts.
    pub fn canonical(&self) -> Outcome {
        match self {
            Outcome::BernoulliSeq { bits } => {
                let (s, f) = self.tally().expect("bernoulli");
                debug_assert_eq!(s + f, bits.len() as u32);
                Outcome::summary(s, s + f)
            }
            Outcome::MixtureOutcome { component, inner } => Outcome::mixture(*component, inner.canonical()),
            other => other.clone(),
        }
    }

    /// Checks that this outcome is a possible result of `model`.
    pub fn validate_for(&self, model: &ExperimentModel) -> Result<()> {
        model.validate()?;
        match (model, self) {
            (ExperimentModel::Binomial { n_trials }, Outcome::BernoulliSeq { bits }) => {
                check_bits(bits)?;
                if bits.len() != *n_trials as usize {
                    return Err(mismatch(format!(
                        "{} trials observed, Binomial fixes n = {n_trials}",
                        bits.len()
                    )));
                }
                Ok(())
            }
            (ExperimentModel::Binomial { n_trials }, Outcome::BernoulliSummary { successes, trials }) => {
                if trials != n_trials {
                    return Err(mismatch(format!(
                        "{trials} trials observed, Binomial fixes n = {n_trials}"
                    )));
                }
                if successes > trials {
                    return Err(mismatch(format!("{successes} successes in {trials} trials")));
                }
                Ok(())
            }
            (ExperimentModel::NegBinomial { r_target }, Outcome::BernoulliSeq { bits }) => {
                check_bits(bits)?;
                let (successes, _) = self.tally().expect("bernoulli");
                if successes != *r_target {
                    return Err(mismatch(format!(
                        "{successes} successes observed, sampling stops at r = {r_target}"
                    )));
                }
                if bits.last() != Some(&1) {
                    return Err(mismatch("negative binomial sequence must end in a success".into()));
                }
                Ok(())
            }
            (ExperimentModel::NegBinomial { r_target }, Outcome::BernoulliSummary { successes, trials }) => {
                if successes != r_target {
                    return Err(mismatch(format!(
                        "{successes} successes observed, sampling stops at r = {r_target}"
                    )));
                }
                if trials < successes {
                    return Err(mismatch(format!("{successes} successes in {trials} trials")));
                }
                Ok(())
            }
            (ExperimentModel::NormalFixedN { n: fixed, .. }, Outcome::NormalSummary { mean, n }) => {
                check_mean(*mean)?;
                if n != fixed {
                    return Err(mismatch(format!("{n} observations, sample size fixed at {fixed}")));
                }
                Ok(())
            }
            (ExperimentModel::NormalOptionalStopping { sigma, n_max }, Outcome::NormalSummary { mean, n }) => {
                check_mean(*mean)?;
                if *n == 0 || n > n_max {
                    return Err(mismatch(format!("stop at n = {n} outside 1..={n_max}")));
                }
                // A stopped sample sits at or beyond the boundary; the
                // boundary point itself is admitted as the limiting outcome.
                let b = boundary(*sigma, *n);
                if *mean < b * (1.0 - 1e-12) {
                    return Err(mismatch(format!(
                        "mean {mean} is below the stopping boundary {b} at n = {n}"
                    )));
                }
                Ok(())
            }
            (m, Outcome::MixtureOutcome { component, inner }) if m.is_compound() => {
                let c = m.component(*component).expect("compound model has two components");
                inner.validate_for(c)
            }
            (m, o) => Err(mismatch(format!("{o} is not an outcome of {m}"))),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::BernoulliSeq { bits } => {
                f.write_str("seq[")?;
                for b in bits {
                    write!(f, "{b}")?;
                }
                f.write_str("]")
            }
            Outcome::BernoulliSummary { successes, trials } => write!(f, "r = {successes}, n = {trials}"),
            Outcome::NormalSummary { mean, n } => write!(f, "xbar = {mean}, n = {n}"),
            Outcome::MixtureOutcome { component, inner } => write!(f, "(j = {component}, {inner})"),
        }
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.iter().all(|&b| b <= 1) {
        Ok(())
    } else {
        Err(mismatch("trial values must be 0 or 1".into()))
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_finite() {
        Ok(())
    } else {
        Err(mismatch(format!("mean {mean} is not finite")))
    }
}

fn mismatch(msg: String) -> Error {
    Error::OutcomeMismatch(msg)
}
