// SPDX-License-Identifier: Apache-2.0

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::likelihood::{check_param, pmf_unchecked};
use super::model::{Component, ExperimentModel};
use super::outcome::Outcome;
use crate::error::{Error, Result};
use crate::normal;
use crate::scalar::{rational_from_f64, ParamValue, Scalar};

/// Partial sums of an infinite support give up after this many terms.
const MAX_TERMS: u32 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    /// Total probability found (a partial sum for infinite supports).
    pub total: Scalar,
    /// The sum covered the entire support.
    pub complete: bool,
    /// Largest trial count included, when the support had to be truncated.
    pub truncation_point: Option<u32>,
    pub passed: bool,
}

/// Checks that f(·; param) sums (or integrates) to one.
///
/// Finite Bernoulli supports are summed exactly and must equal 1. Negative
/// binomial supports are summed over N = r, r + 1, … until the partial sum
/// reaches 1 − tol. Normal densities are integrated numerically and must be
/// within `tol` of 1.
pub fn normalization_check(model: &ExperimentModel, param: &ParamValue, tol: f64) -> Result<NormalizationReport> {
    model.validate()?;
    check_param(model, param)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let mass = total_mass(model, param, tol)?;
    let passed = match &mass.total {
        Scalar::Exact(t) if mass.complete => t.is_one(),
        Scalar::Exact(t) => *t >= BigRational::one() - rational_from_f64(tol).expect("finite"),
        Scalar::Float(t) => (t - 1.0).abs() <= tol,
    };
    Ok(NormalizationReport {
        total: mass.total,
        complete: mass.complete,
        truncation_point: mass.truncation_point,
        passed,
    })
}

struct Mass {
    total: Scalar,
    complete: bool,
    truncation_point: Option<u32>,
}

fn total_mass(model: &ExperimentModel, param: &ParamValue, tol: f64) -> Result<Mass> {
    match model {
        ExperimentModel::Binomial { n_trials } => {
            let total = (0..=*n_trials)
                .map(|r| pmf_unchecked(model, &Outcome::summary(r, *n_trials), param))
                .fold(Scalar::zero(), |acc, p| acc.add(&p));
            Ok(Mass {
                total,
                complete: true,
                truncation_point: None,
            })
        }
        ExperimentModel::NegBinomial { r_target } => neg_binomial_mass(*r_target, param, tol),
        ExperimentModel::NormalFixedN { n, sigma } => {
            let se = sigma / (*n as f64).sqrt();
            let mu = param.to_f64();
            let total = simpson(
                |x| normal::pdf((x - mu) / se) / se,
                mu - 12.0 * se,
                mu + 12.0 * se,
                4000,
            );
            Ok(Mass {
                total: Scalar::Float(total),
                complete: false,
                truncation_point: None,
            })
        }
        ExperimentModel::NormalOptionalStopping { .. } => Err(Error::Unsupported(
            "the joint law of the stopping time and the mean has no closed form".into(),
        )),
        ExperimentModel::Mixture { .. } | ExperimentModel::Birnbaumized { .. } => {
            let parts = Component::both().map(|j| {
                let c = model.component(j).expect("compound");
                total_mass(c, param, tol)
            });
            let [first, second] = parts;
            let (first, second) = (first?, second?);
            let w = model.component_weight(Component::First).expect("compound");
            Ok(Mass {
                total: Scalar::convex(w, &first.total, &second.total),
                complete: first.complete && second.complete,
                truncation_point: first.truncation_point.max(second.truncation_point),
            })
        }
    }
}

fn neg_binomial_mass(r: u32, param: &ParamValue, tol: f64) -> Result<Mass> {
    let theta = match param {
        ParamValue::Theta(t) => t.clone(),
        ParamValue::Mu(_) => unreachable!("checked"),
    };
    let miss = BigRational::one() - &theta;
    let target = BigRational::one() - rational_from_f64(tol).expect("finite");
    // P(N = r) = θ^r, then P(N = n + 1) = P(N = n) · n / (n − r + 1) · (1 − θ).
    let mut term = num_traits::pow(theta, r as usize);
    let mut total = BigRational::zero();
    let mut n = r;
    loop {
        total += &term;
        if total >= target {
            return Ok(Mass {
                total: Scalar::Exact(total),
                complete: false,
                truncation_point: Some(n),
            });
        }
        if n - r >= MAX_TERMS {
            return Err(Error::Unsupported(format!(
                "partial sum did not reach 1 - {tol} within {MAX_TERMS} terms"
            )));
        }
        term = term * BigRational::new(BigInt::from(n), BigInt::from(n - r + 1)) * &miss;
        n += 1;
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_sums_to_one_exactly() {
        let m = ExperimentModel::binomial(20).unwrap();
        let r = normalization_check(&m, &ParamValue::parse_theta("0.3").unwrap(), 1e-9).unwrap();
        assert!(r.passed && r.complete);
        assert_eq!(r.total, Scalar::one());
    }

    #[test]
    fn negative_binomial_partial_sum() {
        let m = ExperimentModel::neg_binomial(6).unwrap();
        let r = normalization_check(&m, &ParamValue::theta(0.5).unwrap(), 1e-9).unwrap();
        assert!(r.passed);
        let stop = r.truncation_point.unwrap();
        assert!(stop > 6);
        assert!(r.total.to_f64() >= 1.0 - 1e-9 && r.total.to_f64() < 1.0);
    }

    #[test]
    fn mixture_of_binomials_is_exact() {
        let b = ExperimentModel::binomial(20).unwrap();
        let m = ExperimentModel::mixture(0.5, b.clone(), b).unwrap();
        let r = normalization_check(&m, &ParamValue::parse_theta("0.3").unwrap(), 1e-9).unwrap();
        assert_eq!(r.total, Scalar::one());
        assert!(r.passed);
    }

    #[test]
    fn normal_density_integrates_to_one() {
        let m = ExperimentModel::normal_fixed_n(169, 2.0).unwrap();
        let r = normalization_check(&m, &ParamValue::Mu(0.7), 1e-9).unwrap();
        assert!(r.passed, "{:?}", r.total);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let m = ExperimentModel::binomial(2).unwrap();
        let p = ParamValue::theta(0.5).unwrap();
        assert!(normalization_check(&m, &p, 0.0).is_err());
        assert!(normalization_check(&m, &p, -1.0).is_err());
        assert!(normalization_check(&m, &p, f64::NAN).is_err());
    }
}
