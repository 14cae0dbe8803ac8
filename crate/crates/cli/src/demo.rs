// SPDX-License-Identifier: Apache-2.0

//! The demonstrations behind each CLI subcommand.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use slplab_core::audit::{audit_weighted, birnbaumize, infr_conditional, tb_statistic, SemanticsAssignment, TbValue};
use slplab_core::catalog;
use slplab_core::evidence::{
    evidence_equivalent, mixture_conditional, mixture_unconditional, mixture_unconditional_assessment, p_value,
    Direction, HypothesisSpec,
};
use slplab_core::experiment::{
    check_slp_pair, default_grid, verify_factorization, Component, ExperimentModel, Outcome, Record, SliceSelection,
};
use slplab_core::normal;
use slplab_core::stopping::{slp_partner_for_stop, stop_fraction};
use slplab_core::{ParamValue, ParameterSpace, Scalar};

use crate::error::CliError;
use crate::report::Report;

pub type Options = BTreeMap<String, String>;

/// Seed used when neither `--seed` nor the environment override is given.
pub const DEFAULT_SEED: u64 = 1962;

/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "SLPLAB_SEED";

pub const OPTION_KEYS: [&str; 13] = [
    "theta0",
    "mu0",
    "direction",
    "sigma",
    "n-max",
    "reps",
    "seed",
    "weight",
    "semantics",
    "xbar",
    "component",
    "n",
    "r",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoName {
    Example1,
    Example2,
    Example3,
    Example4,
    Audit,
    Factorize,
    SimulateStopping,
}

impl DemoName {
    pub const ALL: [DemoName; 7] = [
        DemoName::Example1,
        DemoName::Example2,
        DemoName::Example3,
        DemoName::Example4,
        DemoName::Audit,
        DemoName::Factorize,
        DemoName::SimulateStopping,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DemoName::Example1 => "example1",
            DemoName::Example2 => "example2",
            DemoName::Example3 => "example3",
            DemoName::Example4 => "example4",
            DemoName::Audit => "audit",
            DemoName::Factorize => "factorize",
            DemoName::SimulateStopping => "simulate-stopping",
        }
    }
}

impl FromStr for DemoName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown demo {s:?}")))
    }
}

/// Reads options, applying defaults and remembering the effective values.
struct Inputs<'a> {
    options: &'a Options,
    used: BTreeMap<String, String>,
}

impl<'a> Inputs<'a> {
    fn new(options: &'a Options) -> Result<Self, CliError> {
        if let Some(key) = options.keys().find(|k| !OPTION_KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown option {key:?}")));
        }
        Ok(Inputs {
            options,
            used: BTreeMap::new(),
        })
    }

    fn raw(&mut self, key: &str, default: &str) -> String {
        let value = self.options.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.used.insert(key.to_string(), value.clone());
        value
    }

    fn parse<T>(&mut self, key: &str, default: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let text = self.raw(key, default);
        text.trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("--{key} {text:?}: {e}")))
    }

    fn theta0(&mut self) -> Result<ParamValue, CliError> {
        let text = self.raw("theta0", "0.5");
        ParamValue::parse_theta(&text).map_err(|e| CliError::Usage(format!("--theta0: {e}")))
    }

    fn direction(&mut self, default: &str) -> Result<Direction, CliError> {
        let text = self.raw("direction", default);
        text.parse().map_err(|e| CliError::Usage(format!("--direction: {e}")))
    }

    fn weight(&mut self) -> Result<f64, CliError> {
        let w: f64 = self.parse("weight", "0.5")?;
        if w > 0.0 && w < 1.0 {
            Ok(w)
        } else {
            Err(CliError::Usage(format!("--weight {w} must lie in (0, 1)")))
        }
    }

    fn seed(&mut self) -> Result<u64, CliError> {
        self.parse("seed", &DEFAULT_SEED.to_string())
    }

    fn positive(&mut self, key: &str, default: &str) -> Result<u32, CliError> {
        let v: u32 = self.parse(key, default)?;
        if v == 0 {
            return Err(CliError::Usage(format!("--{key} must be at least 1")));
        }
        Ok(v)
    }

    fn finish(self, demo: DemoName) -> Report {
        Report::new(demo.as_str(), self.used)
    }
}

/// Runs a named demonstration.
pub fn run_demo(name: &str, options: &Options) -> Result<Report, CliError> {
    let demo: DemoName = name.parse()?;
    let inputs = Inputs::new(options)?;
    match demo {
        DemoName::Example1 => example1(inputs),
        DemoName::Example2 => example2(inputs),
        DemoName::Example3 => example3(inputs),
        DemoName::Example4 => example4(inputs),
        DemoName::Audit => audit_demo(inputs),
        DemoName::Factorize => factorize(inputs),
        DemoName::SimulateStopping => simulate_stopping(inputs),
    }
}

fn invariant(msg: impl Into<String>) -> CliError {
    CliError::Invariant(msg.into())
}

fn bernoulli_pair(inputs: &mut Inputs<'_>) -> Result<slplab_core::experiment::SlpPair, CliError> {
    let n = inputs.positive("n", "20")?;
    let r = inputs.positive("r", "6")?;
    if r > n {
        return Err(CliError::Usage(format!("--r {r} exceeds --n {n}")));
    }
    let first = Record::new(ExperimentModel::binomial(n)?, Outcome::summary(r, n))?;
    let second = Record::new(ExperimentModel::neg_binomial(r)?, Outcome::summary(r, n))?;
    check_slp_pair(&first, &second, &default_grid(ParameterSpace::Bernoulli))?
        .ok_or_else(|| invariant("binomial and negative binomial likelihoods are not proportional"))
}

fn example1(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let pair = bernoulli_pair(&mut inputs)?;
    let hyp = HypothesisSpec::new(inputs.theta0()?, inputs.direction("less")?)?;
    let weight = inputs.weight()?;
    let binomial = p_value(&pair.first().model, &pair.first().outcome, &hyp)?;
    let negbinomial = p_value(&pair.second().model, &pair.second().outcome, &hyp)?;
    let unconditional = mixture_unconditional(&binomial.p_value, &negbinomial.p_value, weight)?;

    let mut report = inputs.finish(DemoName::Example1);
    report.push_number("p_binomial", binomial.p_value.clone(), "component-conditional");
    report.push_number("p_negbinomial", negbinomial.p_value.clone(), "component-conditional");
    report.push_number(
        "likelihood_ratio_constant",
        pair.constant().clone(),
        "exact-kernel-ratio",
    );
    report.push_number(
        "p_mixture_unconditional",
        unconditional.p_value,
        "mixture-unconditional",
    );
    report.push_flag(
        "slp_violation",
        !evidence_equivalent(&binomial, &negbinomial),
        "evidence-equivalence",
    );
    report.assessments = vec![binomial, negbinomial];
    Ok(report)
}

fn example2(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let sigma: f64 = inputs.parse("sigma", "1")?;
    let n_max = inputs.positive("n-max", "169")?;
    let reps: u32 = inputs.parse("reps", "10000")?;
    let seed = inputs.seed()?;
    let pair = slp_partner_for_stop(n_max, sigma)?;
    let hyp = HypothesisSpec::new(ParamValue::Mu(0.0), Direction::Greater)?;
    let fixed = p_value(&pair.first().model, &pair.first().outcome, &hyp)?;
    let study = stop_fraction(sigma, n_max, reps, seed)?;

    let mut report = inputs.finish(DemoName::Example2);
    report.push_number("likelihood_ratio_constant", pair.constant().clone(), "grid-ratio");
    report.push_number("p_fixed_n", fixed.p_value.clone(), "component-conditional");
    report.push_number("nominal_level", Scalar::Float(normal::sf(1.96)), "normal-cdf");
    report.push_number(
        "optional_stopping_rejection_rate",
        Scalar::Float(study.final_fraction()),
        "monte-carlo",
    );
    report.push_number("rejection_rate_se", Scalar::Float(study.standard_error), "monte-carlo");
    report.push_flag(
        "slp_violation",
        (study.final_fraction() - fixed.p()).abs() > 5.0 * study.standard_error,
        "monte-carlo-5se",
    );
    report.assessments = vec![fixed];
    report.studies = vec![study];
    Ok(report)
}

fn example3(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let xbar: f64 = inputs.parse("xbar", "3.9")?;
    let j: u8 = inputs.parse("component", "2")?;
    let j = Component::try_from(j).map_err(CliError::Usage)?;
    let mu0: f64 = inputs.parse("mu0", "0")?;
    let hyp = HypothesisSpec::new(ParamValue::mu(mu0)?, inputs.direction("greater")?)?;
    let weight = inputs.weight()?;
    let mix = catalog::instruments_mixture_weighted(weight)?;
    let obs = Outcome::mixture(j, Outcome::normal(xbar, 1));
    let conditional = mixture_conditional(&mix, &obs, &hyp)?;
    let unconditional = mixture_unconditional_assessment(&mix, &obs, &hyp)?;

    let mut report = inputs.finish(DemoName::Example3);
    report.push_number("p_conditional", conditional.p_value.clone(), "component-conditional");
    report.push_number(
        "p_unconditional",
        unconditional.p_value.clone(),
        "mixture-unconditional",
    );
    report.push_flag(
        "conditional_equals_unconditional",
        evidence_equivalent(&conditional, &unconditional),
        "evidence-equivalence",
    );
    report.assessments = vec![conditional, unconditional];
    Ok(report)
}

fn example4(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let sigma: f64 = inputs.parse("sigma", "1")?;
    let n_max = inputs.positive("n-max", "169")?;
    let reps: u32 = inputs.parse("reps", "10000")?;
    let seed = inputs.seed()?;
    let weight = inputs.weight()?;
    let pair = slp_partner_for_stop(n_max, sigma)?;
    let eb = birnbaumize(pair.clone(), weight)?;
    let observed = &pair.second().outcome;
    let tb = tb_statistic(&eb, Component::Second, observed)?;
    let TbValue::CollapsedPair { canonical } = &tb else {
        return Err(invariant("the optional-stopping member did not collapse"));
    };
    let hyp = HypothesisSpec::new(ParamValue::Mu(0.0), Direction::Greater)?;
    let fixed = infr_conditional(&eb, Component::First, &pair.first().outcome, &hyp)?;
    let study = stop_fraction(sigma, n_max, reps, seed)?;
    let stopping_p = Scalar::Float(study.final_fraction());

    let mut report = inputs.finish(DemoName::Example4);
    report.push_flag("tb_collapsed", tb.is_collapsed(), "tb-statistic");
    report.push_text(
        "tb_value",
        format!("T-B(E2, {observed}) = ({}, {})", canonical.model, canonical.outcome),
        "tb-statistic",
    );
    report.push_number("p_fixed_n", fixed.p_value.clone(), "component-conditional");
    report.push_number("p_optional_stopping", stopping_p.clone(), "monte-carlo");
    report.push_number(
        "p_birnbaum_unconditional",
        Scalar::convex(weight, &fixed.p_value, &stopping_p),
        "birnbaum-unconditional-monte-carlo",
    );
    report.assessments = vec![fixed];
    report.studies = vec![study];
    Ok(report)
}

fn audit_demo(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let pair = bernoulli_pair(&mut inputs)?;
    let hyp = HypothesisSpec::new(inputs.theta0()?, inputs.direction("less")?)?;
    let weight = inputs.weight()?;
    let semantics: Vec<SemanticsAssignment> = match inputs.options.get("semantics") {
        Some(text) => {
            let sem = text.parse().map_err(|e| CliError::Usage(format!("--semantics: {e}")))?;
            inputs.used.insert("semantics".into(), text.clone());
            vec![sem]
        }
        None => {
            inputs.used.insert("semantics".into(), "standard".into());
            SemanticsAssignment::standard().to_vec()
        }
    };
    let verdicts = semantics
        .into_iter()
        .map(|sem| audit_weighted(&pair, weight, &hyp, sem))
        .collect::<Result<Vec<_>, _>>()?;
    let first = p_value(&pair.first().model, &pair.first().outcome, &hyp)?;
    let second = p_value(&pair.second().model, &pair.second().outcome, &hyp)?;

    let mut report = inputs.finish(DemoName::Audit);
    report.assessments = vec![first, second];
    report.verdicts = verdicts;
    Ok(report)
}

fn factorize(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let n = inputs.positive("n", "20")?;
    let r = inputs.positive("r", "6")?;
    if r > n {
        return Err(CliError::Usage(format!("--r {r} exceeds --n {n}")));
    }
    let params: Vec<ParamValue> = ["0.1", "0.5", "0.9"]
        .iter()
        .map(|t| ParamValue::parse_theta(t))
        .collect::<Result<_, _>>()?;
    let binomial = verify_factorization(&ExperimentModel::binomial(n)?, &params, &SliceSelection::Only(vec![r]))?;
    let negbinomial = verify_factorization(
        &ExperimentModel::neg_binomial(r)?,
        &params,
        &SliceSelection::Only(vec![n]),
    )?;

    let mut report = inputs.finish(DemoName::Factorize);
    for (label, f) in [("binomial", &binomial), ("negbinomial", &negbinomial)] {
        let slice = &f.slices[0];
        report.push_number(
            &format!("{label}_conditional"),
            slice.uniform_value.clone(),
            "enumeration",
        );
        report.push_flag(&format!("{label}_factorizes"), f.passed, "enumeration");
    }
    if !(binomial.passed && negbinomial.passed) {
        return Err(invariant("sufficiency factorization failed on an enumerated slice"));
    }
    report.factorizations = vec![binomial, negbinomial];
    Ok(report)
}

fn simulate_stopping(mut inputs: Inputs<'_>) -> Result<Report, CliError> {
    let sigma: f64 = inputs.parse("sigma", "1")?;
    let n_max = inputs.positive("n-max", "169")?;
    let reps: u32 = inputs.parse("reps", "10000")?;
    let seed = inputs.seed()?;
    let study = stop_fraction(sigma, n_max, reps, seed)?;
    let nominal = normal::sf(1.96);

    let mut report = inputs.finish(DemoName::SimulateStopping);
    report.push_number("stop_fraction", Scalar::Float(study.final_fraction()), "monte-carlo");
    report.push_number("standard_error", Scalar::Float(study.standard_error), "monte-carlo");
    report.push_number("nominal_level", Scalar::Float(nominal), "normal-cdf");
    report.push_flag(
        "exceeds_nominal",
        study.final_fraction() > nominal + 5.0 * study.standard_error,
        "monte-carlo-5se",
    );
    report.studies = vec![study];
    Ok(report)
}
