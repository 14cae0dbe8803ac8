// SPDX-License-Identifier: Apache-2.0

//! One-sided p-values, each tagged with the sampling distribution that
//! produced it.
//!
//! There is deliberately no way to build an [`EvidenceAssessment`] without a
//! [`SamplingDistribution`]: an assessment of "x, from somewhere" cannot be
//! computed, so it cannot be represented.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{binomial_coefficient, Component, ExperimentModel, Outcome, Record};
use crate::normal;
use crate::scalar::{format_rational, ParamValue, Scalar};

/// Absolute tolerance for comparing p-values that are not both exact.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Evidence against the null toward smaller parameter values.
    Less,
    /// Evidence against the null toward larger parameter values.
    Greater,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "less" => Ok(Direction::Less),
            "greater" => Ok(Direction::Greater),
            other => Err(Error::InvalidHypothesis(format!(
                "direction {other:?} is not less|greater"
            ))),
        }
    }
}

/// A simple null hypothesis and a one-sided alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub null_value: ParamValue,
    pub direction: Direction,
}

impl HypothesisSpec {
    pub fn new(null_value: ParamValue, direction: Direction) -> Result<Self> {
        null_value
            .check()
            .map_err(|e| Error::InvalidHypothesis(e.to_string()))?;
        Ok(HypothesisSpec { null_value, direction })
    }

    fn check_for(&self, model: &ExperimentModel) -> Result<()> {
        self.null_value
            .check()
            .map_err(|e| Error::InvalidHypothesis(e.to_string()))?;
        let space = model.parameter_space()?;
        if space != self.null_value.space() {
            return Err(Error::InvalidHypothesis(format!(
                "null value {} is not in {space}",
                self.null_value
            )));
        }
        Ok(())
    }
}

/// The sampling distribution a p-value was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingDistribution {
    /// The distribution of the experiment actually performed.
    ComponentConditional,
    /// The weighted average over the components of a mixture.
    MixtureUnconditional,
    /// The distribution of the index-erasing statistic of an enlarged experiment.
    BirnbaumUnconditional,
}

impl fmt::Display for SamplingDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingDistribution::ComponentConditional => "component-conditional",
            SamplingDistribution::MixtureUnconditional => "mixture-unconditional",
            SamplingDistribution::BirnbaumUnconditional => "birnbaum-unconditional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssessmentFlag {
    /// An enlarged-experiment outcome outside the pair, reported with its index.
    NonCollapsed,
    /// The tail probability is below the smallest positive double (< 1e-300).
    TailUnderflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceAssessment {
    pub p_value: Scalar,
    pub distribution_used: SamplingDistribution,
    /// The experiment and outcome being assessed; absent when combining bare p-values.
    pub source: Option<Record>,
    pub trace: String,
    #[serde(default)]
    pub flags: Vec<AssessmentFlag>,
}

impl EvidenceAssessment {
    pub fn p(&self) -> f64 {
        self.p_value.to_f64()
    }

    pub fn has_flag(&self, flag: AssessmentFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Equivalence of two assessments: equal p-values, exactly when both are
/// rational and within [`EQUIVALENCE_TOLERANCE`] otherwise.
pub fn evidence_equivalent(a: &EvidenceAssessment, b: &EvidenceAssessment) -> bool {
    a.p_value.approx_eq(&b.p_value, EQUIVALENCE_TOLERANCE)
}

/// P(at most `k` successes in `n` trials).
fn binomial_cdf(theta: &BigRational, n: u32, k: u32) -> BigRational {
    let miss = BigRational::one() - theta;
    let mut total = BigRational::zero();
    for i in 0..=k.min(n) {
        let coef = BigRational::from_integer(binomial_coefficient(n, i));
        total += coef * num_traits::pow(theta.clone(), i as usize) * num_traits::pow(miss.clone(), (n - i) as usize);
    }
    total
}

/// P(at least `k` successes in `n` trials).
fn binomial_upper(theta: &BigRational, n: u32, k: u32) -> BigRational {
    if k == 0 {
        return BigRational::one();
    }
    BigRational::one() - binomial_cdf(theta, n, k - 1)
}

/// The p-value of a component experiment under its own sampling distribution.
///
/// - Binomial: P(R ≤ r) for `Less`, P(R ≥ r) for `Greater`.
/// - Negative binomial: small θ means many trials, so `Less` is P(N ≥ n),
///   computed as P(fewer than r successes in the first n − 1 trials);
///   `Greater` is P(N ≤ n) = P(at least r successes in n trials).
/// - Fixed-n normal: z = √n (x̄ − μ₀)/σ, then 1 − Φ(z) or Φ(z).
pub fn p_value(model: &ExperimentModel, outcome: &Outcome, hyp: &HypothesisSpec) -> Result<EvidenceAssessment> {
    if model.is_compound() {
        return Err(Error::Unsupported(format!(
            "{model} has a randomizer stage; use the mixture or enlarged-experiment assessments"
        )));
    }
    outcome.validate_for(model)?;
    hyp.check_for(model)?;
    let canonical = outcome.canonical();
    let mut flags = Vec::new();
    let (p_value, trace) = match (model, &canonical, &hyp.null_value) {
        (ExperimentModel::Binomial { n_trials }, Outcome::BernoulliSummary { successes, .. }, ParamValue::Theta(t)) => {
            let (p, op) = match hyp.direction {
                Direction::Less => (binomial_cdf(t, *n_trials, *successes), "<="),
                Direction::Greater => (binomial_upper(t, *n_trials, *successes), ">="),
            };
            (
                Scalar::Exact(p),
                format!(
                    "P(R {op} {successes}; theta0 = {}) under Binomial(n = {n_trials})",
                    format_rational(t)
                ),
            )
        }
        (ExperimentModel::NegBinomial { r_target }, Outcome::BernoulliSummary { trials, .. }, ParamValue::Theta(t)) => {
            let (p, note) = match hyp.direction {
                Direction::Less => (
                    binomial_cdf(t, trials - 1, r_target - 1),
                    format!(
                        "P(N >= {trials}) = P(fewer than {r_target} successes in {} trials)",
                        trials - 1
                    ),
                ),
                Direction::Greater => (
                    binomial_upper(t, *trials, *r_target),
                    format!("P(N <= {trials}) = P(at least {r_target} successes in {trials} trials)"),
                ),
            };
            (
                Scalar::Exact(p),
                format!(
                    "{note}; theta0 = {} under NegBinomial(r = {r_target})",
                    format_rational(t)
                ),
            )
        }
        (ExperimentModel::NormalFixedN { n, sigma }, Outcome::NormalSummary { mean, .. }, ParamValue::Mu(mu0)) => {
            let z = (*n as f64).sqrt() * (mean - mu0) / sigma;
            let p = match hyp.direction {
                Direction::Greater => normal::sf(z),
                Direction::Less => normal::cdf(z),
            };
            let tail = match hyp.direction {
                Direction::Greater => "1 - Phi(z)",
                Direction::Less => "Phi(z)",
            };
            let mut trace = format!("{tail} with z = sqrt({n}) (xbar - {mu0}) / {sigma} = {z}");
            if p == 0.0 {
                flags.push(AssessmentFlag::TailUnderflow);
                trace.push_str("; p < 1e-300 (below double precision)");
            }
            (Scalar::Float(p), trace)
        }
        (ExperimentModel::NormalOptionalStopping { .. }, _, _) => {
            return Err(Error::Unsupported(
                "optional-stopping p-values have no closed form; estimate them by simulation".into(),
            ))
        }
        _ => unreachable!("validated"),
    };
    Ok(EvidenceAssessment {
        p_value,
        distribution_used: SamplingDistribution::ComponentConditional,
        source: Some(Record {
            model: model.clone(),
            outcome: outcome.clone(),
        }),
        trace,
        flags,
    })
}

fn check_probability(p: &Scalar, name: &str) -> Result<()> {
    let ok = match p {
        Scalar::Exact(r) => *r >= BigRational::zero() && *r <= BigRational::one(),
        Scalar::Float(x) => (0.0..=1.0).contains(x),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")))
    }
}

/// weight · p₁ + (1 − weight) · p₂: the mixture's unconditional p-value.
pub fn mixture_unconditional(p_first: &Scalar, p_second: &Scalar, weight_first: f64) -> Result<EvidenceAssessment> {
    check_probability(p_first, "p_first")?;
    check_probability(p_second, "p_second")?;
    if !(weight_first > 0.0 && weight_first < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "weight {weight_first} must lie in (0, 1)"
        )));
    }
    Ok(EvidenceAssessment {
        p_value: Scalar::convex(weight_first, p_first, p_second),
        distribution_used: SamplingDistribution::MixtureUnconditional,
        source: None,
        trace: format!("{weight_first} * {} + {} * {}", p_first, 1.0 - weight_first, p_second),
        flags: Vec::new(),
    })
}

/// The unconditional assessment of a mixture outcome: the same measurement
/// assessed under each component, then averaged with the randomizer weights.
pub fn mixture_unconditional_assessment(
    mix: &ExperimentModel,
    obs: &Outcome,
    hyp: &HypothesisSpec,
) -> Result<EvidenceAssessment> {
    let (j, inner) = split_mixture(mix, obs)?;
    let first = p_value(mix.component(Component::First).expect("mixture"), inner, hyp)?;
    let second = p_value(mix.component(Component::Second).expect("mixture"), inner, hyp)?;
    let w = mix.component_weight(Component::First).expect("mixture");
    let mut a = mixture_unconditional(&first.p_value, &second.p_value, w)?;
    a.trace = format!(
        "averaged over both components for observed j = {j}: {w} * [{}] + {} * [{}]",
        first.trace,
        1.0 - w,
        second.trace
    );
    a.flags = merge_flags(&first.flags, &second.flags);
    a.source = Some(Record {
        model: mix.clone(),
        outcome: obs.clone(),
    });
    Ok(a)
}

/// The conditional assessment of a mixture outcome: the performed
/// component's own p-value.
pub fn mixture_conditional(mix: &ExperimentModel, obs: &Outcome, hyp: &HypothesisSpec) -> Result<EvidenceAssessment> {
    let (j, inner) = split_mixture(mix, obs)?;
    let component = mix.component(j).expect("mixture");
    let mut a = p_value(component, inner, hyp)?;
    a.trace = format!("conditioned on randomizer outcome j = {j}: {}", a.trace);
    a.source = Some(Record {
        model: mix.clone(),
        outcome: obs.clone(),
    });
    Ok(a)
}

fn split_mixture<'a>(mix: &ExperimentModel, obs: &'a Outcome) -> Result<(Component, &'a Outcome)> {
    if !matches!(mix, ExperimentModel::Mixture { .. }) {
        return Err(Error::InvalidArgument(format!("{mix} is not a mixture experiment")));
    }
    match obs {
        Outcome::MixtureOutcome { component, inner } => {
            obs.validate_for(mix)?;
            Ok((*component, inner))
        }
        other => Err(Error::OutcomeMismatch(format!("{other} carries no component index"))),
    }
}

pub(crate) fn merge_flags(a: &[AssessmentFlag], b: &[AssessmentFlag]) -> Vec<AssessmentFlag> {
    let mut flags = a.to_vec();
    for f in b {
        if !flags.contains(f) {
            flags.push(*f);
        }
    }
    flags
}

/// Exact rational `numer / 2^exp`, handy for stating Bernoulli p-values.
pub fn dyadic(numer: u64, exp: u32) -> Scalar {
    Scalar::Exact(BigRational::new(
        BigInt::from(numer),
        num_traits::pow(BigInt::from(2), exp as usize),
    ))
}
