// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use super::slp::SlpPair;
use crate::error::{Error, Result};
use crate::scalar::ParameterSpace;

/// Index of a mixture component, the value of the randomizer's indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Component {
    First,
    Second,
}

impl Component {
    pub fn index(self) -> u8 {
        match self {
            Component::First => 1,
            Component::Second => 2,
        }
    }

    pub fn both() -> [Component; 2] {
        [Component::First, Component::Second]
    }
}

impl TryFrom<u8> for Component {
    type Error = String;

    fn try_from(j: u8) -> std::result::Result<Self, String> {
        match j {
            1 => Ok(Component::First),
            2 => Ok(Component::Second),
            other => Err(format!("component index {other} is not 1 or 2")),
        }
    }
}

impl From<Component> for u8 {
    fn from(c: Component) -> u8 {
        c.index()
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A parametric experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentModel {
    /// A fixed number of Bernoulli trials; R, the number of successes, is random.
    Binomial { n_trials: u32 },
    /// Bernoulli trials until `r_target` successes; N, the number of trials, is random.
    NegBinomial { r_target: u32 },
    /// `n` normal observations with known σ.
    NormalFixedN { n: u32, sigma: f64 },
    /// Normal observations, stopping at the first n with x̄ > 1.96σ/√n,
    /// truncated at `n_max`.
    NormalOptionalStopping { sigma: f64, n_max: u32 },
    /// A randomizer picks `first` with probability `weight_first`, else `second`.
    Mixture {
        weight_first: f64,
        first: Box<ExperimentModel>,
        second: Box<ExperimentModel>,
    },
    /// The enlarged experiment built over an SLP pair.
    Birnbaumized { pair: Box<SlpPair>, weight_first: f64 },
}

impl ExperimentModel {
    pub fn binomial(n_trials: u32) -> Result<Self> {
        let m = ExperimentModel::Binomial { n_trials };
        m.validate()?;
        Ok(m)
    }

    pub fn neg_binomial(r_target: u32) -> Result<Self> {
        let m = ExperimentModel::NegBinomial { r_target };
        m.validate()?;
        Ok(m)
    }

    pub fn normal_fixed_n(n: u32, sigma: f64) -> Result<Self> {
        let m = ExperimentModel::NormalFixedN { n, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn normal_optional_stopping(sigma: f64, n_max: u32) -> Result<Self> {
        let m = ExperimentModel::NormalOptionalStopping { sigma, n_max };
        m.validate()?;
        Ok(m)
    }

    pub fn mixture(weight_first: f64, first: ExperimentModel, second: ExperimentModel) -> Result<Self> {
        let m = ExperimentModel::Mixture {
            weight_first,
            first: Box::new(first),
            second: Box::new(second),
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks the structural invariants, recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentModel::Binomial { n_trials } => positive(*n_trials, "n_trials"),
            ExperimentModel::NegBinomial { r_target } => positive(*r_target, "r_target"),
            ExperimentModel::NormalFixedN { n, sigma } => {
                positive(*n, "n")?;
                positive_sigma(*sigma)
            }
            ExperimentModel::NormalOptionalStopping { sigma, n_max } => {
                positive(*n_max, "n_max")?;
                positive_sigma(*sigma)
            }
            ExperimentModel::Mixture {
                weight_first,
                first,
                second,
            } => {
                weight_in_open_unit(*weight_first)?;
                first.validate()?;
                second.validate()?;
                self.parameter_space().map(|_| ())
            }
            ExperimentModel::Birnbaumized { pair, weight_first } => {
                weight_in_open_unit(*weight_first)?;
                pair.first.model.validate()?;
                pair.second.model.validate()?;
                self.parameter_space().map(|_| ())
            }
        }
    }

    pub fn parameter_space(&self) -> Result<ParameterSpace> {
        match self {
            ExperimentModel::Binomial { .. } | ExperimentModel::NegBinomial { .. } => Ok(ParameterSpace::Bernoulli),
            ExperimentModel::NormalFixedN { .. } | ExperimentModel::NormalOptionalStopping { .. } => {
                Ok(ParameterSpace::NormalMean)
            }
            ExperimentModel::Mixture { first, second, .. } => shared_space(first, second),
            ExperimentModel::Birnbaumized { pair, .. } => shared_space(&pair.first.model, &pair.second.model),
        }
    }

    /// True for models with a randomizer stage.
    pub fn is_compound(&self) -> bool {
        matches!(
            self,
            ExperimentModel::Mixture { .. } | ExperimentModel::Birnbaumized { .. }
        )
    }

    pub fn component(&self, j: Component) -> Option<&ExperimentModel> {
        match (self, j) {
            (ExperimentModel::Mixture { first, .. }, Component::First) => Some(first),
            (ExperimentModel::Mixture { second, .. }, Component::Second) => Some(second),
            (ExperimentModel::Birnbaumized { pair, .. }, Component::First) => Some(&pair.first.model),
            (ExperimentModel::Birnbaumized { pair, .. }, Component::Second) => Some(&pair.second.model),
            _ => None,
        }
    }

    /// Probability that the randomizer selects component `j`.
    pub fn component_weight(&self, j: Component) -> Option<f64> {
        let w = match self {
            ExperimentModel::Mixture { weight_first, .. } | ExperimentModel::Birnbaumized { weight_first, .. } => {
                *weight_first
            }
            _ => return None,
        };
        Some(match j {
            Component::First => w,
            Component::Second => 1.0 - w,
        })
    }
}

impl fmt::Display for ExperimentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentModel::Binomial { n_trials } => write!(f, "Binomial(n = {n_trials})"),
            ExperimentModel::NegBinomial { r_target } => write!(f, "NegBinomial(r = {r_target})"),
            ExperimentModel::NormalFixedN { n, sigma } => write!(f, "NormalFixedN(n = {n}, sigma = {sigma})"),
            ExperimentModel::NormalOptionalStopping { sigma, n_max } => {
                write!(f, "NormalOptionalStopping(sigma = {sigma}, n_max = {n_max})")
            }
            ExperimentModel::Mixture {
                weight_first,
                first,
                second,
            } => {
                write!(f, "Mixture({weight_first}: {first} | {second})")
            }
            ExperimentModel::Birnbaumized { pair, weight_first } => write!(
                f,
                "Birnbaumized({weight_first}: {} | {})",
                pair.first.model, pair.second.model
            ),
        }
    }
}

fn shared_space(a: &ExperimentModel, b: &ExperimentModel) -> Result<ParameterSpace> {
    let (sa, sb) = (a.parameter_space()?, b.parameter_space()?);
    if sa == sb {
        Ok(sa)
    } else {
        Err(Error::ParameterSpaceMismatch(sa, sb))
    }
}

fn positive(value: u32, name: &str) -> Result<()> {
    if value >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be at least 1")))
    }
}

fn positive_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("sigma = {sigma} must be positive")))
    }
}

pub(crate) fn weight_in_open_unit(w: f64) -> Result<()> {
    if w > 0.0 && w < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("weight {w} must lie in (0, 1)")))
    }
}
