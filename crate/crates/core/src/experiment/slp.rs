// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::likelihood::{likelihood_kernel, log_pmf, LikelihoodKernel};
use super::model::ExperimentModel;
use super::outcome::Outcome;
use crate::error::{Error, Result};
use crate::scalar::{ParamValue, ParameterSpace, Scalar};

/// Largest relative spread of the likelihood ratio over a grid that still
/// counts as constant, for pairs that cannot be compared exactly.
pub const SLP_RELATIVE_TOLERANCE: f64 = 1e-12;

/// An experiment together with one of its outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub model: ExperimentModel,
    pub outcome: Outcome,
}

impl Record {
    pub fn new(model: ExperimentModel, outcome: Outcome) -> Result<Self> {
        outcome.validate_for(&model)?;
        Ok(Record { model, outcome })
    }

    pub fn validate(&self) -> Result<()> {
        self.outcome.validate_for(&self.model)
    }
}

/// Two records whose likelihoods satisfy f₁(θ) = c · f₂(θ) for every θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlpPair {
    pub(crate) first: Record,
    pub(crate) second: Record,
    pub(crate) constant: Scalar,
}

impl SlpPair {
    /// Builds the pair, checking proportionality on the default grid.
    pub fn from_records(first: Record, second: Record) -> Result<Self> {
        let space = first.model.parameter_space()?;
        let grid = default_grid(space);
        check_slp_pair(&first, &second, &grid)?.ok_or_else(|| {
            Error::InvalidPair(format!(
                "likelihoods of ({}, {}) and ({}, {}) are not proportional",
                first.model, first.outcome, second.model, second.outcome
            ))
        })
    }

    pub fn first(&self) -> &Record {
        &self.first
    }

    pub fn second(&self) -> &Record {
        &self.second
    }

    /// c in f₁ = c · f₂.
    pub fn constant(&self) -> &Scalar {
        &self.constant
    }

    /// Re-checks the proportionality invariant, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = SlpPair::from_records(self.first.clone(), self.second.clone())?;
        if rebuilt
            .constant
            .approx_eq(&self.constant, SLP_RELATIVE_TOLERANCE * self.constant.to_f64().abs())
        {
            Ok(())
        } else {
            Err(Error::InvalidPair(format!(
                "stated constant {} but likelihood ratio is {}",
                self.constant, rebuilt.constant
            )))
        }
    }

    pub fn parameter_space(&self) -> Result<ParameterSpace> {
        self.first.model.parameter_space()
    }

    /// The same pair seen from the other side, with constant 1/c.
    pub fn swapped(&self) -> SlpPair {
        SlpPair {
            first: self.second.clone(),
            second: self.first.clone(),
            constant: Scalar::one().div(&self.constant).expect("positive constant"),
        }
    }
}

/// Eleven interior grid points: θ = k/12 or μ = −5, …, 5.
pub fn default_grid(space: ParameterSpace) -> Vec<ParamValue> {
    match space {
        ParameterSpace::Bernoulli => (1..=11)
            .map(|k| ParamValue::theta_ratio(k, 12).expect("interior"))
            .collect(),
        ParameterSpace::NormalMean => (-5..=5).map(|k| ParamValue::Mu(k as f64)).collect(),
    }
}

/// Tests whether `a` and `b` have proportional likelihoods.
///
/// Bernoulli-family records are compared exactly through their kernels; the
/// grid is only validated. Otherwise the log-likelihood ratio is evaluated on
/// the grid and must vary by less than [`SLP_RELATIVE_TOLERANCE`].
pub fn check_slp_pair(a: &Record, b: &Record, grid: &[ParamValue]) -> Result<Option<SlpPair>> {
    a.validate()?;
    b.validate()?;
    let (sa, sb) = (a.model.parameter_space()?, b.model.parameter_space()?);
    if sa != sb {
        return Err(Error::ParameterSpaceMismatch(sa, sb));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for p in grid {
        if p.space() != sa {
            return Err(Error::ParameterSpaceMismatch(sa, p.space()));
        }
        p.check()?;
    }

    let ka = likelihood_kernel(&a.model, &a.outcome)?;
    let kb = likelihood_kernel(&b.model, &b.outcome)?;
    let constant = match (&ka, &kb) {
        (LikelihoodKernel::Bernoulli { constant: ca, .. }, LikelihoodKernel::Bernoulli { constant: cb, .. }) => {
            if !ka.same_shape(&kb) {
                return Ok(None);
            }
            Scalar::Exact(ca / cb)
        }
        _ => match grid_ratio(a, b, grid)? {
            Some(c) => Scalar::Float(c),
            None => return Ok(None),
        },
    };
    Ok(Some(SlpPair {
        first: a.clone(),
        second: b.clone(),
        constant,
    }))
}

fn grid_ratio(a: &Record, b: &Record, grid: &[ParamValue]) -> Result<Option<f64>> {
    let mut diffs = Vec::with_capacity(grid.len());
    for p in grid {
        let la = log_pmf(&a.model, &a.outcome, p)?;
        let lb = log_pmf(&b.model, &b.outcome, p)?;
        if !la.is_finite() || !lb.is_finite() {
            return Err(Error::NonPositiveLikelihood(p.to_string()));
        }
        diffs.push(la - lb);
    }
    let lo = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).exp_m1() > SLP_RELATIVE_TOLERANCE {
        return Ok(None);
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    Ok(Some(mean.exp()))
}
