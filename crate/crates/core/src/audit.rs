// SPDX-License-Identifier: Apache-2.0

//! The enlarged experiment over an SLP pair and the audit of the
//! sufficiency + weak conditionality → SLP argument.
//!
//! Premise one reads Infr of the enlarged experiment E-B through the
//! index-erasing statistic T-B; premise two reads it through the component
//! actually performed. Each premise is evaluated under an explicit
//! [`Reading`], and the verdict records which one blocks the argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{
    evidence_equivalent, merge_flags, p_value, AssessmentFlag, EvidenceAssessment, HypothesisSpec, SamplingDistribution,
};
use crate::experiment::weight_in_open_unit;
use crate::experiment::{check_slp_pair, default_grid, Component, ExperimentModel, Outcome, Record, SlpPair};
use crate::scalar::Scalar;

/// E-B: a randomizer picks a member of the pair with `weight_first`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirnbaumExperiment {
    pair: SlpPair,
    weight_first: f64,
}

impl BirnbaumExperiment {
    pub(crate) fn from_parts(pair: SlpPair, weight_first: f64) -> Self {
        BirnbaumExperiment { pair, weight_first }
    }

    pub fn pair(&self) -> &SlpPair {
        &self.pair
    }

    pub fn weight_first(&self) -> f64 {
        self.weight_first
    }

    /// E-B as an experiment model whose outcomes are `(j, x)`.
    pub fn model(&self) -> ExperimentModel {
        ExperimentModel::Birnbaumized {
            pair: Box::new(self.pair.clone()),
            weight_first: self.weight_first,
        }
    }

    pub fn member(&self, j: Component) -> &Record {
        match j {
            Component::First => self.pair.first(),
            Component::Second => self.pair.second(),
        }
    }

    fn component(&self, j: Component) -> &ExperimentModel {
        &self.member(j).model
    }

    fn is_member(&self, j: Component, outcome: &Outcome) -> bool {
        self.member(j).outcome.canonical() == outcome.canonical()
    }
}

/// Builds E-B over `pair`.
///
/// Inside E-B the two members have likelihoods w·f′(x′*; θ) and
/// (1 − w)·f″(x″*; θ); these are re-checked for proportionality.
pub fn birnbaumize(pair: SlpPair, weight_first: f64) -> Result<BirnbaumExperiment> {
    weight_in_open_unit(weight_first)?;
    pair.validate()?;
    let eb = BirnbaumExperiment::from_parts(pair, weight_first);
    let model = eb.model();
    let members = Component::both().map(|j| Record {
        model: model.clone(),
        outcome: Outcome::mixture(j, eb.member(j).outcome.clone()),
    });
    let grid = default_grid(eb.pair.parameter_space()?);
    check_slp_pair(&members[0], &members[1], &grid)?
        .ok_or_else(|| Error::InvalidPair("weighted member likelihoods are not proportional".into()))?;
    Ok(eb)
}

/// Value of the Birnbaum statistic T-B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TbValue {
    /// Either pair member, reported as the first member with its index erased.
    CollapsedPair { canonical: Record },
    /// Any other outcome, reported as observed with its index.
    Plain { component: Component, outcome: Outcome },
}

impl TbValue {
    pub fn is_collapsed(&self) -> bool {
        matches!(self, TbValue::CollapsedPair { .. })
    }
}

/// T-B(E^j, x): collapses both pair members to (E′, x′*), passes everything
/// else through.
pub fn tb_statistic(eb: &BirnbaumExperiment, component: Component, outcome: &Outcome) -> Result<TbValue> {
    outcome.validate_for(eb.component(component))?;
    if eb.is_member(component, outcome) {
        Ok(TbValue::CollapsedPair {
            canonical: eb.pair.first().clone(),
        })
    } else {
        Ok(TbValue::Plain {
            component,
            outcome: outcome.clone(),
        })
    }
}

/// Inference from the unconditional sampling distribution of T-B.
///
/// A collapsed value is assessed as w·p′ + (1 − w)·p″, averaging over the
/// performed and unperformed members. A plain value keeps its component's
/// p-value and is flagged [`AssessmentFlag::NonCollapsed`].
pub fn infr_unconditional(eb: &BirnbaumExperiment, tb: &TbValue, hyp: &HypothesisSpec) -> Result<EvidenceAssessment> {
    match tb {
        TbValue::CollapsedPair { canonical } => {
            if canonical != eb.pair.first() {
                return Err(Error::InvalidArgument(
                    "collapsed value does not belong to this experiment".into(),
                ));
            }
            let first = member_p_value(eb, Component::First, hyp)?;
            let second = member_p_value(eb, Component::Second, hyp)?;
            let w = eb.weight_first;
            Ok(EvidenceAssessment {
                p_value: Scalar::convex(w, &first.p_value, &second.p_value),
                distribution_used: SamplingDistribution::BirnbaumUnconditional,
                source: Some(canonical.clone()),
                trace: format!(
                    "T-B erased the index; {w} * [{}] + {} * [{}]",
                    first.trace,
                    1.0 - w,
                    second.trace
                ),
                flags: merge_flags(&first.flags, &second.flags),
            })
        }
        TbValue::Plain { component, outcome } => {
            if eb.is_member(*component, outcome) {
                return Err(Error::InvalidArgument("pair member must be reported collapsed".into()));
            }
            let mut a = p_value(eb.component(*component), outcome, hyp)?;
            a.distribution_used = SamplingDistribution::BirnbaumUnconditional;
            a.trace = format!("T-B passed (j = {component}) through: {}", a.trace);
            a.flags.push(AssessmentFlag::NonCollapsed);
            Ok(a)
        }
    }
}

/// Inference from the sampling distribution of the component actually
/// performed, as if it had been known all along.
pub fn infr_conditional(
    eb: &BirnbaumExperiment,
    component: Component,
    outcome: &Outcome,
    hyp: &HypothesisSpec,
) -> Result<EvidenceAssessment> {
    let mut a = p_value(eb.component(component), outcome, hyp)?;
    a.trace = format!("E-B conditioned on j = {component}: {}", a.trace);
    Ok(a)
}

fn member_p_value(eb: &BirnbaumExperiment, j: Component, hyp: &HypothesisSpec) -> Result<EvidenceAssessment> {
    let m = eb.member(j);
    p_value(&m.model, &m.outcome, hyp)
}

/// How Infr of the enlarged experiment is read in a premise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    Unconditional,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvaluationOrder {
    #[serde(rename = "p1-first")]
    Premise1First,
    #[serde(rename = "p2-first")]
    Premise2First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemanticsAssignment {
    pub premise1: Reading,
    pub premise2: Reading,
    pub evaluation_order: EvaluationOrder,
}

impl SemanticsAssignment {
    pub fn new(premise1: Reading, premise2: Reading) -> Self {
        SemanticsAssignment {
            premise1,
            premise2,
            evaluation_order: EvaluationOrder::Premise1First,
        }
    }

    pub fn with_order(mut self, order: EvaluationOrder) -> Self {
        self.evaluation_order = order;
        self
    }

    /// The three assignments the argument is usually read under.
    pub fn standard() -> [SemanticsAssignment; 3] {
        [
            SemanticsAssignment::new(Reading::Unconditional, Reading::Conditional),
            SemanticsAssignment::new(Reading::Unconditional, Reading::Unconditional),
            SemanticsAssignment::new(Reading::Conditional, Reading::Conditional),
        ]
    }

    /// All four reading combinations under both evaluation orders.
    pub fn all() -> Vec<SemanticsAssignment> {
        let readings = [Reading::Unconditional, Reading::Conditional];
        let orders = [EvaluationOrder::Premise1First, EvaluationOrder::Premise2First];
        let mut out = Vec::with_capacity(8);
        for p1 in readings {
            for p2 in readings {
                for order in orders {
                    out.push(SemanticsAssignment::new(p1, p2).with_order(order));
                }
            }
        }
        out
    }
}

impl std::str::FromStr for SemanticsAssignment {
    type Err = Error;

    /// `"unconditional,conditional"`, optionally followed by `",p2-first"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let reading = |t: &str| match t {
            "unconditional" | "uncond" => Ok(Reading::Unconditional),
            "conditional" | "cond" => Ok(Reading::Conditional),
            other => Err(Error::InvalidArgument(format!(
                "reading {other:?} is not conditional|unconditional"
            ))),
        };
        let order = |t: &str| match t {
            "p1-first" => Ok(EvaluationOrder::Premise1First),
            "p2-first" => Ok(EvaluationOrder::Premise2First),
            other => Err(Error::InvalidArgument(format!(
                "order {other:?} is not p1-first|p2-first"
            ))),
        };
        match parts.as_slice() {
            [p1, p2] => Ok(SemanticsAssignment::new(reading(p1)?, reading(p2)?)),
            [p1, p2, o] => Ok(SemanticsAssignment::new(reading(p1)?, reading(p2)?).with_order(order(o)?)),
            _ => Err(Error::InvalidArgument(format!(
                "semantics {s:?} should be <reading>,<reading>[,<order>]"
            ))),
        }
    }
}

/// Two assessments set against each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub left: EvidenceAssessment,
    pub right: EvidenceAssessment,
    /// |p_left − p_right|.
    pub gap: Scalar,
    pub equivalent: bool,
}

impl Witness {
    fn between(left: EvidenceAssessment, right: EvidenceAssessment) -> Self {
        let equivalent = evidence_equivalent(&left, &right);
        let gap = left.p_value.abs_diff(&right.p_value);
        Witness {
            left,
            right,
            gap,
            equivalent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimEvaluation {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
}

impl ClaimEvaluation {
    fn from_witnesses(witnesses: Vec<Witness>) -> Self {
        ClaimEvaluation {
            holds: witnesses.iter().all(|w| w.equivalent),
            witnesses,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Both premises hold and the conclusion fails.
    Invalid,
    BlockedAtPremise1,
    BlockedAtPremise2,
    /// The conclusion holds; the pair is no counterexample.
    NoViolation,
}

impl Verdict {
    pub fn from_truths(premise1: bool, premise2: bool, conclusion: bool) -> Verdict {
        match (premise1, premise2, conclusion) {
            (_, _, true) => Verdict::NoViolation,
            (false, _, false) => Verdict::BlockedAtPremise1,
            (true, false, false) => Verdict::BlockedAtPremise2,
            (true, true, false) => Verdict::Invalid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    /// Infr_{E-B}(x′*) equiv Infr_{E-B}(x″*).
    pub premise1: ClaimEvaluation,
    /// Infr_{E-B}(x^{j*}) equiv Infr_{E^j}(x^{j*}) for j = 1 and j = 2.
    pub premise2: ClaimEvaluation,
    /// Infr_{E′}(x′*) equiv Infr_{E″}(x″*).
    pub conclusion: ClaimEvaluation,
    pub verdict: Verdict,
    pub semantics: SemanticsAssignment,
}

impl AuditVerdict {
    /// Equality of everything except the evaluation order that produced it.
    pub fn same_findings(&self, other: &AuditVerdict) -> bool {
        self.premise1 == other.premise1
            && self.premise2 == other.premise2
            && self.conclusion == other.conclusion
            && self.verdict == other.verdict
            && self.semantics.premise1 == other.semantics.premise1
            && self.semantics.premise2 == other.semantics.premise2
    }
}

/// Audits the argument on `pair` with an equal-weight enlarged experiment.
pub fn audit(pair: &SlpPair, hyp: &HypothesisSpec, sem: SemanticsAssignment) -> Result<AuditVerdict> {
    audit_weighted(pair, 0.5, hyp, sem)
}

pub fn audit_weighted(
    pair: &SlpPair,
    weight_first: f64,
    hyp: &HypothesisSpec,
    sem: SemanticsAssignment,
) -> Result<AuditVerdict> {
    let eb = birnbaumize(pair.clone(), weight_first)?;

    let infr_eb = |reading: Reading, j: Component| -> Result<EvidenceAssessment> {
        let outcome = &eb.member(j).outcome;
        match reading {
            Reading::Unconditional => infr_unconditional(&eb, &tb_statistic(&eb, j, outcome)?, hyp),
            Reading::Conditional => infr_conditional(&eb, j, outcome, hyp),
        }
    };
    let premise1 = || -> Result<ClaimEvaluation> {
        Ok(ClaimEvaluation::from_witnesses(vec![Witness::between(
            infr_eb(sem.premise1, Component::First)?,
            infr_eb(sem.premise1, Component::Second)?,
        )]))
    };
    let premise2 = || -> Result<ClaimEvaluation> {
        let witnesses = Component::both()
            .into_iter()
            .map(|j| {
                Ok(Witness::between(
                    infr_eb(sem.premise2, j)?,
                    member_p_value(&eb, j, hyp)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClaimEvaluation::from_witnesses(witnesses))
    };

    let (p1, p2) = match sem.evaluation_order {
        EvaluationOrder::Premise1First => {
            let p1 = premise1()?;
            (p1, premise2()?)
        }
        EvaluationOrder::Premise2First => {
            let p2 = premise2()?;
            (premise1()?, p2)
        }
    };
    let conclusion = ClaimEvaluation::from_witnesses(vec![Witness::between(
        member_p_value(&eb, Component::First, hyp)?,
        member_p_value(&eb, Component::Second, hyp)?,
    )]);
    let verdict = Verdict::from_truths(p1.holds, p2.holds, conclusion.holds);
    Ok(AuditVerdict {
        premise1: p1,
        premise2: p2,
        conclusion,
        verdict,
        semantics: sem,
    })
}
