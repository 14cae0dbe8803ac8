// SPDX-License-Identifier: Apache-2.0

//! Brute-force verification of the sufficiency factorization
//! f(x; θ) = f_T(t; θ) · f(x | t) for Bernoulli-trial experiments.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::likelihood::{binomial_coefficient, check_param, pmf_unchecked, sequence_probability};
use super::model::ExperimentModel;
use super::outcome::Outcome;
use crate::error::{Error, Result};
use crate::scalar::{ParamValue, Scalar};

/// Most sequences a single verification will enumerate.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// Which values t of the sufficient statistic to check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SliceSelection {
    /// Every t. Only finite for Binomial models.
    All,
    Only(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    /// R for Binomial, N for NegBinomial.
    pub statistic: u32,
    /// Number of sequences enumerated in the slice.
    pub sequences: u64,
    /// The conditional probability f(x | t) every sequence should have.
    pub uniform_value: Scalar,
    /// f(x; θ) = f_T(t; θ) · uniform_value for every sequence and θ.
    pub factorizes: bool,
    /// f(x; θ) / f_T(t; θ) was the same at every θ, for every sequence.
    pub theta_free: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub model: ExperimentModel,
    pub params: Vec<ParamValue>,
    pub slices: Vec<SliceReport>,
    pub passed: bool,
}

/// Enumerates every sequence in each selected slice and checks the
/// factorization exactly at each θ in `params`.
pub fn verify_factorization(
    model: &ExperimentModel,
    params: &[ParamValue],
    selection: &SliceSelection,
) -> Result<FactorizationReport> {
    model.validate()?;
    if params.is_empty() {
        return Err(Error::InvalidArgument("no parameter values given".into()));
    }
    for p in params {
        check_param(model, p)?;
    }

    let slices: Vec<u32> = match (model, selection) {
        (ExperimentModel::Binomial { n_trials }, SliceSelection::All) => (0..=*n_trials).collect(),
        (ExperimentModel::NegBinomial { .. }, SliceSelection::All) => {
            return Err(Error::InvalidArgument(
                "negative binomial support is infinite; name the slices to check".into(),
            ))
        }
        (ExperimentModel::Binomial { .. } | ExperimentModel::NegBinomial { .. }, SliceSelection::Only(ts)) => {
            ts.clone()
        }
        (m, _) => return Err(Error::Unsupported(format!("factorization enumeration for {m}"))),
    };

    let mut requested: u128 = 0;
    for &t in &slices {
        requested += slice_size(model, t)?;
    }
    if requested > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            requested,
            cap: ENUMERATION_CAP,
        });
    }

    let reports = slices
        .iter()
        .map(|&t| check_slice(model, params, t))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(|s| s.passed);
    Ok(FactorizationReport {
        model: model.clone(),
        params: params.to_vec(),
        slices: reports,
        passed,
    })
}

/// (sequence length, free positions, ones among the free positions, trailing success).
fn slice_shape(model: &ExperimentModel, t: u32) -> Result<(u32, u32, u32, bool)> {
    match model {
        ExperimentModel::Binomial { n_trials } => {
            if t > *n_trials {
                return Err(Error::InvalidArgument(format!("R = {t} exceeds n = {n_trials}")));
            }
            Ok((*n_trials, *n_trials, t, false))
        }
        ExperimentModel::NegBinomial { r_target } => {
            if t < *r_target {
                return Err(Error::InvalidArgument(format!("N = {t} is below r = {r_target}")));
            }
            Ok((t, t - 1, r_target - 1, true))
        }
        _ => unreachable!("filtered by caller"),
    }
}

fn slice_size(model: &ExperimentModel, t: u32) -> Result<u128> {
    let (len, free, ones, _) = slice_shape(model, t)?;
    if len > 31 || matches!(model, ExperimentModel::Binomial { n_trials } if *n_trials > 24) {
        return Err(Error::EnumerationTooLarge {
            requested: 1u128 << len.min(127),
            cap: ENUMERATION_CAP,
        });
    }
    Ok(binomial_coefficient(free, ones).to_u128().unwrap_or(u128::MAX))
}

fn check_slice(model: &ExperimentModel, params: &[ParamValue], t: u32) -> Result<SliceReport> {
    let (len, free, ones, trailing_success) = slice_shape(model, t)?;
    let summary = match model {
        ExperimentModel::Binomial { n_trials } => Outcome::summary(t, *n_trials),
        ExperimentModel::NegBinomial { r_target } => Outcome::summary(*r_target, t),
        _ => unreachable!(),
    };
    let uniform = BigRational::new(BigInt::from(1u32), binomial_coefficient(free, ones));

    let thetas: Vec<&BigRational> = params
        .iter()
        .map(|p| match p {
            ParamValue::Theta(t) => t,
            ParamValue::Mu(_) => unreachable!("checked"),
        })
        .collect();
    let marginals: Vec<BigRational> = params
        .iter()
        .map(|p| match pmf_unchecked(model, &summary, p) {
            Scalar::Exact(r) => r,
            Scalar::Float(_) => unreachable!("bernoulli family is exact"),
        })
        .collect();
    let products: Vec<BigRational> = marginals.iter().map(|m| m * &uniform).collect();

    let mut bits = vec![0u8; len as usize];
    if trailing_success {
        bits[len as usize - 1] = 1;
    }
    let mut sequences = 0u64;
    let mut factorizes = true;
    let mut theta_free = true;
    for mask in masks_with_ones(free, ones) {
        for (i, b) in bits.iter_mut().take(free as usize).enumerate() {
            *b = ((mask >> i) & 1) as u8;
        }
        sequences += 1;
        let mut first_conditional: Option<BigRational> = None;
        for ((theta, marginal), product) in thetas.iter().zip(&marginals).zip(&products) {
            let joint = sequence_probability(theta, &bits);
            factorizes &= joint == *product;
            let conditional = joint / marginal;
            match &first_conditional {
                None => first_conditional = Some(conditional),
                Some(c) => theta_free &= *c == conditional,
            }
        }
    }
    let count_matches =
        BigRational::from_integer(BigInt::from(sequences)) * &uniform == BigRational::from_integer(1.into());
    Ok(SliceReport {
        statistic: t,
        sequences,
        uniform_value: Scalar::Exact(uniform),
        factorizes,
        theta_free,
        passed: factorizes && theta_free && count_matches,
    })
}

/// All `width`-bit masks with exactly `ones` bits set, in increasing order.
fn masks_with_ones(width: u32, ones: u32) -> impl Iterator<Item = u32> {
    debug_assert!(width <= 31 && ones <= width);
    let limit = 1u32 << width;
    let start = if ones == 0 { 0 } else { (1u32 << ones) - 1 };
    let mut next = Some(start);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            // Gosper's hack
            let low = current & current.wrapping_neg();
            let ripple = current + low;
            let following = (((ripple ^ current) >> 2) / low) | ripple;
            (following < limit).then_some(following)
        };
        Some(current)
    })
}
