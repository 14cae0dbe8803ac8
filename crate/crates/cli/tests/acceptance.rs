// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use slplab_cli::{parse_json, run_demo, serialize, Format, Options};
use slplab_core::audit::{audit, birnbaumize, tb_statistic, EvaluationOrder, SemanticsAssignment, TbValue, Verdict};
use slplab_core::catalog;
use slplab_core::evidence::{
    evidence_equivalent, mixture_conditional, mixture_unconditional_assessment, p_value, Direction, HypothesisSpec,
};
use slplab_core::experiment::{
    check_slp_pair, default_grid, pmf, verify_factorization, Component, ExperimentModel, Outcome, Record,
    SliceSelection, SlpPair,
};
use slplab_core::normal;
use slplab_core::stopping::{slp_partner_for_stop, stop_fraction};
use slplab_core::{ParamValue, ParameterSpace, Scalar};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn half() -> HypothesisSpec {
    HypothesisSpec::new(ParamValue::theta_ratio(1, 2).unwrap(), Direction::Less).unwrap()
}

/// Pascal's triangle, independent of the library.
fn choose(n: u64, k: u64) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row.get(k as usize).copied().unwrap_or(0)
}

fn within(start: Instant, limit: u64) -> Check {
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(limit), "took {took:?}, limit {limit} s");
    Ok(())
}

fn example1_violation() -> Check {
    let start = Instant::now();
    let pair = catalog::example1_pair();
    let hyp = half();
    let pb = p_value(&pair.first().model, &pair.first().outcome, &hyp).unwrap();
    let pn = p_value(&pair.second().model, &pair.second().outcome, &hyp).unwrap();
    ensure!(
        pb.p_value == Scalar::ratio(60460, 1 << 20),
        "p_binomial = {}",
        pb.p_value
    );
    ensure!(
        pn.p_value == Scalar::ratio(16664, 1 << 19),
        "p_negbinomial = {}",
        pn.p_value
    );
    ensure!(pb.p_value.is_exact() && pn.p_value.is_exact(), "p-values are not exact");

    let brute_binomial = (0u32..1 << 20).filter(|m| m.count_ones() <= 6).count() as i64;
    ensure!(
        pb.p_value == Scalar::ratio(brute_binomial, 1 << 20),
        "enumeration gives {brute_binomial}/2^20"
    );

    // P(N >= 20) = 1 - sum over n < 20 of #{6th success at trial n} / 2^n.
    let mut stopped_early = 0i64;
    for n in 6u32..20 {
        let hits = (0u32..1 << n)
            .filter(|m| m.count_ones() == 6 && (m >> (n - 1)) & 1 == 1)
            .count() as i64;
        stopped_early += hits << (19 - n);
    }
    let brute_negbinomial = (1 << 19) - stopped_early;
    ensure!(
        pn.p_value == Scalar::ratio(brute_negbinomial, 1 << 19),
        "enumeration gives {brute_negbinomial}/2^19"
    );
    ensure!(!evidence_equivalent(&pb, &pn), "the two p-values agree");

    ensure!(
        pair.constant() == &Scalar::ratio(10, 3),
        "constant = {}",
        pair.constant()
    );
    let grid = default_grid(ParameterSpace::Bernoulli);
    ensure!(grid.len() == 11, "grid has {} points", grid.len());
    for theta in &grid {
        let a = pmf(&pair.first().model, &pair.first().outcome, theta).unwrap();
        let b = pmf(&pair.second().model, &pair.second().outcome, theta).unwrap();
        let ratio = a.div(&b).unwrap();
        ensure!(ratio == Scalar::ratio(10, 3), "ratio {ratio} at {theta:?}");
    }
    within(start, 10)
}

fn sufficiency_factorization() -> Check {
    let start = Instant::now();
    let params: Vec<ParamValue> = ["0.1", "0.5", "0.9"]
        .iter()
        .map(|t| ParamValue::parse_theta(t).unwrap())
        .collect();
    for n in 1..=12u32 {
        let report =
            verify_factorization(&ExperimentModel::binomial(n).unwrap(), &params, &SliceSelection::All).unwrap();
        ensure!(report.passed, "Binomial{{{n}}} failed");
        ensure!(
            report.slices.len() == n as usize + 1,
            "Binomial{{{n}}} has {} slices",
            report.slices.len()
        );
        for slice in &report.slices {
            let c = choose(n as u64, slice.statistic as u64);
            ensure!(
                slice.sequences == c,
                "n = {n}, r = {}: {} sequences",
                slice.statistic,
                slice.sequences
            );
            ensure!(
                slice.uniform_value == Scalar::ratio(1, c as i64),
                "n = {n}, r = {}: conditional {}",
                slice.statistic,
                slice.uniform_value
            );
            ensure!(slice.factorizes && slice.theta_free, "n = {n}, r = {}", slice.statistic);
        }
    }
    let nb = verify_factorization(
        &ExperimentModel::neg_binomial(6).unwrap(),
        &params,
        &SliceSelection::Only(vec![20]),
    )
    .unwrap();
    let slice = &nb.slices[0];
    ensure!(nb.passed, "NegBinomial{{6}} failed");
    ensure!(slice.sequences == 11628, "{} sequences", slice.sequences);
    ensure!(
        slice.uniform_value == Scalar::ratio(1, 11628),
        "conditional {}",
        slice.uniform_value
    );
    within(start, 30)
}

fn check_mixture(mix: &ExperimentModel, inner: &Outcome, hyp: &HypothesisSpec) -> Check {
    let first = p_value(mix.component(Component::First).unwrap(), inner, hyp).unwrap();
    let second = p_value(mix.component(Component::Second).unwrap(), inner, hyp).unwrap();
    let w = mix.component_weight(Component::First).unwrap();
    let expected = Scalar::convex(w, &first.p_value, &second.p_value);
    for (j, alone) in [(Component::First, &first), (Component::Second, &second)] {
        let obs = Outcome::mixture(j, inner.clone());
        let cond = mixture_conditional(mix, &obs, hyp).unwrap();
        let uncond = mixture_unconditional_assessment(mix, &obs, hyp).unwrap();
        ensure!(
            cond.p_value.approx_eq(&alone.p_value, 1e-15),
            "{mix} j = {j:?}: conditional {}",
            cond.p_value
        );
        ensure!(
            uncond.p_value.approx_eq(&expected, 1e-15),
            "{mix} j = {j:?}: unconditional {}",
            uncond.p_value
        );
        if !evidence_equivalent(&first, &second) {
            ensure!(!evidence_equivalent(&cond, &uncond), "{mix} j = {j:?}: readings agree");
        }
    }
    Ok(())
}

fn mixture_assessments() -> Check {
    let instruments = catalog::instruments_mixture();
    let sigmas: Vec<f64> = [Component::First, Component::Second]
        .iter()
        .map(|&j| match instruments.component(j).unwrap() {
            ExperimentModel::NormalFixedN { sigma, .. } => sigma * sigma,
            other => panic!("{other}"),
        })
        .collect();
    ensure!(
        (sigmas[0] - 1e-4).abs() < 1e-18 && (sigmas[1] - 1e4).abs() < 1e-8,
        "variances {sigmas:?}"
    );
    let mut distinct = 0;
    for xbar in [-2.0, -0.001, 0.0, 0.004, 0.02, 1.0, 3.9, 150.0] {
        for dir in [Direction::Greater, Direction::Less] {
            let hyp = HypothesisSpec::new(ParamValue::Mu(0.0), dir).unwrap();
            check_mixture(&instruments, &Outcome::normal(xbar, 1), &hyp)?;
            let a = p_value(
                instruments.component(Component::First).unwrap(),
                &Outcome::normal(xbar, 1),
                &hyp,
            )
            .unwrap();
            let b = p_value(
                instruments.component(Component::Second).unwrap(),
                &Outcome::normal(xbar, 1),
                &hyp,
            )
            .unwrap();
            distinct += usize::from(!evidence_equivalent(&a, &b));
        }
    }
    ensure!(distinct > 0, "no instruments case had distinct component p-values");

    let example1 = ExperimentModel::mixture(
        0.5,
        ExperimentModel::binomial(20).unwrap(),
        ExperimentModel::neg_binomial(6).unwrap(),
    )
    .unwrap();
    for dir in [Direction::Less, Direction::Greater] {
        for k in [1, 4, 6, 8, 11] {
            let hyp = HypothesisSpec::new(ParamValue::theta_ratio(k, 12).unwrap(), dir).unwrap();
            check_mixture(&example1, &Outcome::summary(6, 20), &hyp)?;
        }
    }
    let obs = Outcome::mixture(Component::Second, Outcome::summary(6, 20));
    let uncond = mixture_unconditional_assessment(&example1, &obs, &half()).unwrap();
    ensure!(
        uncond.p_value == Scalar::ratio(23447, 524288),
        "example 1 unconditional {}",
        uncond.p_value
    );
    Ok(())
}

fn bits_with_ones(len: u32, ones: Vec<u32>) -> Vec<u8> {
    (0..len).map(|i| u8::from(ones.contains(&i))).collect()
}

/// Randomized Bernoulli-family SLP pairs mixing summaries and sequences.
fn bernoulli_pairs() -> impl Strategy<Value = (SlpPair, HypothesisSpec)> {
    (1u32..=30)
        .prop_flat_map(|n| (Just(n), 1u32..=n))
        .prop_flat_map(|(n, r)| {
            (
                Just((n, r)),
                prop::sample::subsequence((0..n).collect::<Vec<_>>(), r as usize),
                prop::sample::subsequence((0..n - 1).collect::<Vec<_>>(), r as usize - 1),
                any::<(bool, bool)>(),
                1i64..64,
                any::<bool>(),
            )
        })
        .prop_map(|((n, r), ones, partner_ones, (seq_first, seq_second), k, less)| {
            let first_outcome = if seq_first {
                Outcome::sequence(bits_with_ones(n, ones))
            } else {
                Outcome::summary(r, n)
            };
            let second_outcome = if seq_second {
                let mut bits = bits_with_ones(n - 1, partner_ones);
                bits.push(1);
                Outcome::sequence(bits)
            } else {
                Outcome::summary(r, n)
            };
            let a = Record::new(ExperimentModel::binomial(n).unwrap(), first_outcome).unwrap();
            let b = Record::new(ExperimentModel::neg_binomial(r).unwrap(), second_outcome).unwrap();
            let pair = check_slp_pair(&a, &b, &default_grid(ParameterSpace::Bernoulli))
                .unwrap()
                .expect("proportional");
            let dir = if less { Direction::Less } else { Direction::Greater };
            (
                pair,
                HypothesisSpec::new(ParamValue::theta_ratio(k, 64).unwrap(), dir).unwrap(),
            )
        })
}

fn birnbaum_audit() -> Check {
    let pair = catalog::example1_pair();
    let hyp = half();
    let [uc, uu, cc] = SemanticsAssignment::standard();
    let v = audit(&pair, &hyp, uc).unwrap();
    ensure!(
        v.premise1.holds && v.premise2.holds && !v.conclusion.holds && v.verdict == Verdict::Invalid,
        "(uncond, cond): {:?}",
        v.verdict
    );
    let v = audit(&pair, &hyp, uu).unwrap();
    ensure!(
        v.verdict == Verdict::BlockedAtPremise2,
        "(uncond, uncond): {:?}",
        v.verdict
    );
    let witness = Scalar::ratio(23447, 524288).abs_diff(&Scalar::ratio(15115, 262144));
    ensure!(
        v.premise2.witnesses.iter().any(|w| w.gap == witness),
        "(uncond, uncond) lacks the witness {witness}"
    );
    ensure!(
        (witness.to_f64() - (0.04472 - 0.05766f64).abs()).abs() < 1e-5,
        "witness {witness}"
    );
    let v = audit(&pair, &hyp, cc).unwrap();
    ensure!(v.verdict == Verdict::BlockedAtPremise1, "(cond, cond): {:?}", v.verdict);

    for sem in SemanticsAssignment::all() {
        let a = audit(&pair, &hyp, sem.with_order(EvaluationOrder::Premise1First)).unwrap();
        let b = audit(&pair, &hyp, sem.with_order(EvaluationOrder::Premise2First)).unwrap();
        ensure!(a.same_findings(&b), "order flip changed {sem:?}");
    }

    let mut runner = TestRunner::new(Config {
        cases: 400,
        failure_persistence: None,
        ..Config::default()
    });
    let violating = std::cell::Cell::new(0u32);
    runner
        .run(&bernoulli_pairs(), |(pair, hyp)| {
            let p1 = p_value(&pair.first().model, &pair.first().outcome, &hyp).unwrap();
            let p2 = p_value(&pair.second().model, &pair.second().outcome, &hyp).unwrap();
            if evidence_equivalent(&p1, &p2) {
                return Ok(());
            }
            violating.set(violating.get() + 1);
            for sem in SemanticsAssignment::all() {
                let v = audit(&pair, &hyp, sem).unwrap();
                if v.premise1.holds && v.premise2.holds && v.conclusion.holds {
                    return Err(TestCaseError::fail(format!("{sem:?} sound on {pair:?}")));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let violating = violating.get();
    ensure!(violating >= 100, "only {violating} violating pairs sampled");
    Ok(())
}

fn tb_collapse() -> Check {
    let n = 12u32;
    let (mut first_checked, mut second_checked) = (0u64, 0u64);
    for r in 1..=n {
        let pair = catalog::example1_pair_with(n, r).unwrap();
        let eb = birnbaumize(pair.clone(), 0.5).unwrap();
        let designated = tb_statistic(&eb, Component::First, &pair.first().outcome).unwrap();
        ensure!(designated.is_collapsed(), "r = {r}: designated member not collapsed");
        ensure!(
            designated == tb_statistic(&eb, Component::Second, &pair.second().outcome).unwrap(),
            "r = {r}: members collapse to different values"
        );
        for mask in 0u32..1 << n {
            let bits: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            let outcome = Outcome::sequence(bits);
            let tb = tb_statistic(&eb, Component::First, &outcome).unwrap();
            first_checked += 1;
            if mask.count_ones() == r {
                ensure!(tb == designated, "r = {r}, mask {mask:b}: not collapsed");
            } else {
                ensure!(
                    tb == TbValue::Plain {
                        component: Component::First,
                        outcome
                    },
                    "r = {r}, mask {mask:b}: index not preserved"
                );
            }
        }
        for len in r..=n + 4 {
            for mask in 0u32..1 << (len - 1) {
                if mask.count_ones() != r - 1 {
                    continue;
                }
                let mut bits: Vec<u8> = (0..len - 1).map(|i| ((mask >> i) & 1) as u8).collect();
                bits.push(1);
                let outcome = Outcome::sequence(bits);
                let tb = tb_statistic(&eb, Component::Second, &outcome).unwrap();
                second_checked += 1;
                if len == n {
                    ensure!(tb == designated, "r = {r}, partner length {len}: not collapsed");
                } else {
                    ensure!(
                        tb == TbValue::Plain {
                            component: Component::Second,
                            outcome
                        },
                        "r = {r}, partner length {len}: index not preserved"
                    );
                }
            }
        }
    }
    let partner_space: u64 = (1..=n as u64)
        .map(|r| (r..=n as u64 + 4).map(|len| choose(len - 1, r - 1)).sum::<u64>())
        .sum();
    ensure!(first_checked == 12 << 12, "{first_checked} binomial outcomes checked");
    ensure!(
        second_checked == partner_space,
        "{second_checked} partner outcomes checked"
    );
    Ok(())
}

fn optional_stopping() -> Check {
    let start = Instant::now();
    let (seed, reps) = (1962u64, 10_000u32);
    let nominal = 0.025;
    let one = stop_fraction(1.0, 1, reps, seed).unwrap();
    ensure!(
        (one.final_fraction() - nominal).abs() <= 4.0 * one.standard_error,
        "n_max = 1: {} (se {})",
        one.final_fraction(),
        one.standard_error
    );
    let long = stop_fraction(1.0, 169, reps, seed).unwrap();
    ensure!(
        long.final_fraction() > nominal + 5.0 * long.standard_error,
        "n_max = 169: {} (se {})",
        long.final_fraction(),
        long.standard_error
    );
    let mut previous = 0.0;
    for n_max in [1, 2, 5, 10, 50, 100, 169, 400, 1000] {
        let f = stop_fraction(1.0, n_max, reps, seed).unwrap().final_fraction();
        ensure!(f >= previous, "fraction fell to {f} at n_max = {n_max}");
        previous = f;
    }
    let path = stop_fraction(1.0, 1000, reps, seed).unwrap();
    let by_n: Vec<f64> = path.stop_fraction_by_n.values().copied().collect();
    ensure!(by_n.windows(2).all(|w| w[0] <= w[1]), "running fractions decrease");
    ensure!(
        path.fraction_by(169) == Some(long.final_fraction()),
        "horizons disagree on shared paths"
    );

    let hyp = HypothesisSpec::new(ParamValue::Mu(0.0), Direction::Greater).unwrap();
    for stop_n in 1..=1000u32 {
        let pair = slp_partner_for_stop(stop_n, 1.0).unwrap();
        let p = p_value(&pair.first().model, &pair.first().outcome, &hyp).unwrap().p();
        ensure!((p - 0.0250).abs() <= 1e-4, "stop_n = {stop_n}: p = {p}");
    }
    ensure!((normal::sf(1.96) - 0.0250).abs() <= 1e-4, "nominal level");
    within(start, 60)
}

fn slplab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_slplab"))
        .args(args)
        .env_remove("SLPLAB_SEED")
        .output()
        .expect("binary runs")
}

fn plumbing() -> Check {
    let fast: Options = [("reps".to_string(), "500".to_string())].into();
    for name in [
        "example1",
        "example2",
        "example3",
        "example4",
        "audit",
        "factorize",
        "simulate-stopping",
    ] {
        let report = run_demo(name, &fast).unwrap();
        let bytes = serialize(&report, Format::Json).unwrap();
        let back = parse_json(&bytes).unwrap();
        ensure!(back == report, "{name}: round trip changed the report");
        ensure!(
            serialize(&back, Format::Json).unwrap() == bytes,
            "{name}: bytes changed"
        );
    }

    let args = ["example4", "--reps", "3000", "--seed", "42", "--format", "json"];
    let a = slplab(&args);
    let b = slplab(&args);
    ensure!(a.status.code() == Some(0), "exit {:?}", a.status.code());
    ensure!(
        a.stdout == b.stdout && !a.stdout.is_empty(),
        "fixed-seed output differs"
    );

    for args in [
        &["example1"][..],
        &["audit", "--format", "csv"],
        &["factorize", "--n", "8", "--r", "3"],
    ] {
        let out = slplab(args);
        ensure!(out.status.code() == Some(0), "{args:?}: exit {:?}", out.status.code());
    }
    for args in [
        &["example1", "--theta0", "0"][..],
        &["example1", "--format", "xml"],
        &["example3", "--component", "5"],
        &["unknown"],
    ] {
        let out = slplab(args);
        ensure!(out.status.code() == Some(2), "{args:?}: exit {:?}", out.status.code());
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("example 1 exact p-values and likelihood ratio", example1_violation),
        ("sufficiency factorization", sufficiency_factorization),
        ("mixture assessments", mixture_assessments),
        ("premise audit verdicts", birnbaum_audit),
        ("T-B collapse over Binomial{12}", tb_collapse),
        ("optional stopping", optional_stopping),
        ("plumbing", plumbing),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS criterion {}: {label} ({took:.2} s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {}: {label} ({took:.2} s): {e}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
