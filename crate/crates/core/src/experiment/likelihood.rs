// SPDX-License-Identifier: Apache-2.0

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::model::{Component, ExperimentModel};
use super::outcome::Outcome;
use crate::error::{Error, Result};
use crate::normal;
use crate::scalar::{rational_from_f64, rational_to_f64, ParamValue, Scalar};

pub(crate) fn binomial_coefficient(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0u32);
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

pub(crate) fn check_param(model: &ExperimentModel, param: &ParamValue) -> Result<()> {
    let space = model.parameter_space()?;
    if space != param.space() {
        return Err(Error::ParameterSpaceMismatch(space, param.space()));
    }
    param.check()
}

fn theta_of(param: &ParamValue) -> &BigRational {
    match param {
        ParamValue::Theta(t) => t,
        ParamValue::Mu(_) => unreachable!("parameter space checked by caller"),
    }
}

fn mu_of(param: &ParamValue) -> f64 {
    match param {
        ParamValue::Mu(m) => *m,
        ParamValue::Theta(_) => unreachable!("parameter space checked by caller"),
    }
}

/// θ^successes (1 − θ)^failures.
pub(crate) fn bernoulli_kernel(theta: &BigRational, successes: u32, failures: u32) -> BigRational {
    let miss = BigRational::one() - theta;
    num_traits::pow(theta.clone(), successes as usize) * num_traits::pow(miss, failures as usize)
}

/// Probability of one specific ordered sequence, accumulated trial by trial.
pub(crate) fn sequence_probability(theta: &BigRational, bits: &[u8]) -> BigRational {
    let hit = theta.numer();
    let miss = theta.denom() - theta.numer();
    let mut numer = BigInt::one();
    for &b in bits {
        numer *= if b == 1 { hit } else { &miss };
    }
    let denom = num_traits::pow(theta.denom().clone(), bits.len());
    BigRational::new(numer, denom)
}

fn weight_of(model: &ExperimentModel, j: Component) -> f64 {
    model.component_weight(j).expect("compound model")
}

fn scale_by_weight(w: f64, value: Scalar) -> Scalar {
    match value {
        Scalar::Exact(v) => Scalar::Exact(rational_from_f64(w).expect("finite weight") * v),
        Scalar::Float(v) => Scalar::Float(w * v),
    }
}

/// f(outcome; param): a probability for Bernoulli-family models, a density of
/// x̄ for the normal family.
///
/// For `NormalOptionalStopping` the value is the density of the stopped
/// sample's mean with the μ-free path factor omitted; only its μ-dependence
/// is meaningful, which is all a likelihood needs.
///
/// For compound models the outcome carries its component, and the result is
/// that component's weight times the component's pmf.
pub fn pmf(model: &ExperimentModel, outcome: &Outcome, param: &ParamValue) -> Result<Scalar> {
    outcome.validate_for(model)?;
    check_param(model, param)?;
    Ok(pmf_unchecked(model, outcome, param))
}

pub(crate) fn pmf_unchecked(model: &ExperimentModel, outcome: &Outcome, param: &ParamValue) -> Scalar {
    match (model, outcome) {
        (ExperimentModel::Binomial { .. } | ExperimentModel::NegBinomial { .. }, Outcome::BernoulliSeq { bits }) => {
            Scalar::Exact(sequence_probability(theta_of(param), bits))
        }
        (ExperimentModel::Binomial { n_trials }, Outcome::BernoulliSummary { successes, .. }) => {
            let coef = BigRational::from_integer(binomial_coefficient(*n_trials, *successes));
            Scalar::Exact(coef * bernoulli_kernel(theta_of(param), *successes, n_trials - successes))
        }
        (ExperimentModel::NegBinomial { r_target }, Outcome::BernoulliSummary { trials, .. }) => {
            let coef = BigRational::from_integer(binomial_coefficient(trials - 1, r_target - 1));
            Scalar::Exact(coef * bernoulli_kernel(theta_of(param), *r_target, trials - r_target))
        }
        (
            ExperimentModel::NormalFixedN { sigma, .. } | ExperimentModel::NormalOptionalStopping { sigma, .. },
            Outcome::NormalSummary { mean, n },
        ) => {
            let se = sigma / (*n as f64).sqrt();
            Scalar::Float(normal::pdf((mean - mu_of(param)) / se) / se)
        }
        (m, Outcome::MixtureOutcome { component, inner }) => {
            let c = m.component(*component).expect("validated");
            scale_by_weight(weight_of(m, *component), pmf_unchecked(c, inner, param))
        }
        _ => unreachable!("outcome validated against model"),
    }
}

/// ln f(outcome; param), computed in the log domain for the normal family so
/// that far-tail likelihoods remain comparable.
pub fn log_pmf(model: &ExperimentModel, outcome: &Outcome, param: &ParamValue) -> Result<f64> {
    outcome.validate_for(model)?;
    check_param(model, param)?;
    Ok(log_pmf_unchecked(model, outcome, param))
}

fn log_pmf_unchecked(model: &ExperimentModel, outcome: &Outcome, param: &ParamValue) -> f64 {
    match (model, outcome) {
        (
            ExperimentModel::NormalFixedN { sigma, .. } | ExperimentModel::NormalOptionalStopping { sigma, .. },
            Outcome::NormalSummary { mean, n },
        ) => {
            let se = sigma / (*n as f64).sqrt();
            normal::ln_pdf((mean - mu_of(param)) / se) - se.ln()
        }
        (m, Outcome::MixtureOutcome { component, inner }) => {
            let c = m.component(*component).expect("validated");
            weight_of(m, *component).ln() + log_pmf_unchecked(c, inner, param)
        }
        _ => match pmf_unchecked(model, outcome, param) {
            Scalar::Exact(r) => ln_rational(&r),
            Scalar::Float(x) => x.ln(),
        },
    }
}

fn ln_rational(r: &BigRational) -> f64 {
    let direct = rational_to_f64(r);
    if direct > 0.0 && direct.is_finite() {
        return direct.ln();
    }
    // Outside f64 range: ln p − ln q via bit lengths.
    let ln_big = |x: &BigInt| {
        let bits = x.bits();
        let shift = bits.saturating_sub(60);
        let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    };
    ln_big(r.numer()) - ln_big(r.denom())
}

/// The θ-dependent factor of a likelihood and the θ-free constant in front of it.
#[derive(Debug, Clone, PartialEq)]
pub enum LikelihoodKernel {
    /// constant · θ^successes (1 − θ)^failures.
    Bernoulli {
        successes: u32,
        failures: u32,
        constant: BigRational,
    },
    /// constant · exp(−n (x̄ − μ)² / (2σ²)).
    Normal {
        mean: f64,
        n: u32,
        sigma: f64,
        constant: f64,
    },
}

impl LikelihoodKernel {
    pub fn constant(&self) -> Scalar {
        match self {
            LikelihoodKernel::Bernoulli { constant, .. } => Scalar::Exact(constant.clone()),
            LikelihoodKernel::Normal { constant, .. } => Scalar::Float(*constant),
        }
    }

    /// The kernel without its constant.
    pub fn eval(&self, param: &ParamValue) -> Result<Scalar> {
        param.check()?;
        match (self, param) {
            (
                LikelihoodKernel::Bernoulli {
                    successes, failures, ..
                },
                ParamValue::Theta(t),
            ) => Ok(Scalar::Exact(bernoulli_kernel(t, *successes, *failures))),
            (LikelihoodKernel::Normal { .. }, ParamValue::Mu(_)) => Ok(Scalar::Float(self.ln_eval(param)?.exp())),
            _ => Err(Error::InvalidParameter(format!(
                "{param} does not parameterize this kernel"
            ))),
        }
    }

    pub fn ln_eval(&self, param: &ParamValue) -> Result<f64> {
        match (self, param) {
            (LikelihoodKernel::Normal { mean, n, sigma, .. }, ParamValue::Mu(mu)) => {
                let d = mean - mu;
                Ok(-(*n as f64) * d * d / (2.0 * sigma * sigma))
            }
            _ => match self.eval(param)? {
                Scalar::Exact(r) => Ok(ln_rational(&r)),
                Scalar::Float(x) => Ok(x.ln()),
            },
        }
    }

    /// Whether two kernels share the same θ-dependence exactly.
    pub fn same_shape(&self, other: &LikelihoodKernel) -> bool {
        match (self, other) {
            (
                LikelihoodKernel::Bernoulli {
                    successes: s1,
                    failures: f1,
                    ..
                },
                LikelihoodKernel::Bernoulli {
                    successes: s2,
                    failures: f2,
                    ..
                },
            ) => s1 == s2 && f1 == f2,
            (
                LikelihoodKernel::Normal {
                    mean: m1,
                    n: n1,
                    sigma: s1,
                    ..
                },
                LikelihoodKernel::Normal {
                    mean: m2,
                    n: n2,
                    sigma: s2,
                    ..
                },
            ) => m1 == m2 && (*n1 as f64) / (s1 * s1) == (*n2 as f64) / (s2 * s2),
            _ => false,
        }
    }
}

/// Splits f(outcome; ·) into a constant and a kernel in the parameter.
pub fn likelihood_kernel(model: &ExperimentModel, outcome: &Outcome) -> Result<LikelihoodKernel> {
    outcome.validate_for(model)?;
    Ok(kernel_unchecked(model, outcome))
}

fn kernel_unchecked(model: &ExperimentModel, outcome: &Outcome) -> LikelihoodKernel {
    match (model, outcome) {
        (ExperimentModel::Binomial { .. } | ExperimentModel::NegBinomial { .. }, Outcome::BernoulliSeq { .. }) => {
            let (successes, failures) = outcome.tally().expect("bernoulli");
            LikelihoodKernel::Bernoulli {
                successes,
                failures,
                constant: BigRational::one(),
            }
        }
        (ExperimentModel::Binomial { n_trials }, Outcome::BernoulliSummary { successes, .. }) => {
            LikelihoodKernel::Bernoulli {
                successes: *successes,
                failures: n_trials - successes,
                constant: BigRational::from_integer(binomial_coefficient(*n_trials, *successes)),
            }
        }
        (ExperimentModel::NegBinomial { r_target }, Outcome::BernoulliSummary { trials, .. }) => {
            LikelihoodKernel::Bernoulli {
                successes: *r_target,
                failures: trials - r_target,
                constant: BigRational::from_integer(binomial_coefficient(trials - 1, r_target - 1)),
            }
        }
        (
            ExperimentModel::NormalFixedN { sigma, .. } | ExperimentModel::NormalOptionalStopping { sigma, .. },
            Outcome::NormalSummary { mean, n },
        ) => LikelihoodKernel::Normal {
            mean: *mean,
            n: *n,
            sigma: *sigma,
            constant: (*n as f64).sqrt() / (sigma * (2.0 * std::f64::consts::PI).sqrt()),
        },
        (m, Outcome::MixtureOutcome { component, inner }) => {
            let w = weight_of(m, *component);
            let c = m.component(*component).expect("validated");
            match kernel_unchecked(c, inner) {
                LikelihoodKernel::Bernoulli {
                    successes,
                    failures,
                    constant,
                } => LikelihoodKernel::Bernoulli {
                    successes,
                    failures,
                    constant: rational_from_f64(w).expect("finite weight") * constant,
                },
                LikelihoodKernel::Normal {
                    mean,
                    n,
                    sigma,
                    constant,
                } => LikelihoodKernel::Normal {
                    mean,
                    n,
                    sigma,
                    constant: w * constant,
                },
            }
        }
        _ => unreachable!("outcome validated against model"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(n: i64, d: i64) -> ParamValue {
        ParamValue::theta_ratio(n, d).unwrap()
    }

    #[test]
    fn binomial_example_pmf() {
        let m = ExperimentModel::binomial(20).unwrap();
        let p = pmf(&m, &Outcome::summary(6, 20), &theta(1, 2)).unwrap();
        assert_eq!(p, Scalar::ratio(38760, 1 << 20));
    }

    #[test]
    fn negative_binomial_example_pmf() {
        let m = ExperimentModel::neg_binomial(6).unwrap();
        let p = pmf(&m, &Outcome::summary(6, 20), &theta(1, 2)).unwrap();
        assert_eq!(p, Scalar::ratio(11628, 1 << 20));
    }

    #[test]
    fn single_trial_success_is_theta() {
        let m = ExperimentModel::binomial(1).unwrap();
        let p = pmf(&m, &Outcome::summary(1, 1), &theta(7, 10)).unwrap();
        assert_eq!(p, Scalar::ratio(7, 10));
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = ExperimentModel::binomial(3).unwrap();
        let o = Outcome::summary(1, 3);
        assert!(matches!(
            pmf(&m, &o, &ParamValue::Theta(BigRational::one())),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            pmf(&m, &o, &ParamValue::Mu(0.0)),
            Err(Error::ParameterSpaceMismatch(..))
        ));
        assert!(matches!(
            pmf(&m, &Outcome::summary(1, 4), &theta(1, 2)),
            Err(Error::OutcomeMismatch(_))
        ));
    }

    #[test]
    fn example_kernels() {
        let bin = ExperimentModel::binomial(20).unwrap();
        let nb = ExperimentModel::neg_binomial(6).unwrap();
        let k1 = likelihood_kernel(&bin, &Outcome::summary(6, 20)).unwrap();
        let k2 = likelihood_kernel(&nb, &Outcome::summary(6, 20)).unwrap();
        for k in [&k1, &k2] {
            match k {
                LikelihoodKernel::Bernoulli {
                    successes, failures, ..
                } => {
                    assert_eq!((*successes, *failures), (6, 14));
                }
                _ => panic!("bernoulli kernel expected"),
            }
        }
        let one = ExperimentModel::binomial(1).unwrap();
        match likelihood_kernel(&one, &Outcome::summary(0, 1)).unwrap() {
            LikelihoodKernel::Bernoulli {
                successes, failures, ..
            } => assert_eq!((successes, failures), (0, 1)),
            _ => panic!(),
        }
    }

    #[test]
    fn sequence_probability_matches_kernel() {
        let t = BigRational::new(3.into(), 10.into());
        let bits = [1, 0, 0, 1, 0];
        assert_eq!(sequence_probability(&t, &bits), bernoulli_kernel(&t, 2, 3));
    }

    #[test]
    fn normal_density_of_mean() {
        let m = ExperimentModel::normal_fixed_n(4, 2.0).unwrap();
        // xbar ~ N(mu, 1)
        let p = pmf(&m, &Outcome::normal(1.0, 4), &ParamValue::Mu(0.0)).unwrap();
        assert!((p.to_f64() - normal::pdf(1.0)).abs() < 1e-15);
        let lp = log_pmf(&m, &Outcome::normal(1.0, 4), &ParamValue::Mu(0.0)).unwrap();
        assert!((lp - normal::pdf(1.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn log_of_tiny_rational() {
        let r = BigRational::new(1.into(), num_traits::pow(BigInt::from(2), 2000));
        assert!((ln_rational(&r) + 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
