// SPDX-License-Identifier: Apache-2.0

//! Optional stopping: sample normal observations until x̄ > 1.96σ/√n.
//!
//! Random numbers come from ChaCha8 with one stream per replication:
//! replication `i` of a study seeded with `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` with `set_stream(i)`. Aggregates are integer
//! counts, so a study is bit-identical at any level of parallelism.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{check_slp_pair, ExperimentModel, Outcome, Record, SlpPair};
use crate::scalar::ParamValue;

/// The nominal 0.025 upper-tail critical value.
pub const BOUNDARY_Z: f64 = 1.96;

/// Smallest replication count a study accepts.
pub const MIN_REPLICATIONS: u32 = 100;

/// 1.96 σ / √n.
pub fn boundary(sigma: f64, n: u32) -> f64 {
    BOUNDARY_Z * sigma / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingPathResult {
    pub stopped: bool,
    pub stop_n: Option<u32>,
    /// x̄ at the stop, or at `n_max` for a path that never stopped.
    pub final_mean: f64,
    /// The boundary at the same n as `final_mean`.
    pub boundary_at_stop: f64,
}

/// Runs one path: x_i = μ + σ z_i with z_i taken from `noise`, stopping at
/// the first n ≤ `n_max` with x̄_n strictly above the boundary.
pub fn simulate_path<I>(mu: f64, sigma: f64, n_max: u32, noise: I) -> Result<StoppingPathResult>
where
    I: IntoIterator<Item = f64>,
{
    check_design(sigma, n_max)?;
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mu = {mu}")));
    }
    let mut noise = noise.into_iter();
    let mut sum = 0.0;
    let mut mean = 0.0;
    for n in 1..=n_max {
        let z = noise.next().ok_or(Error::NoiseExhausted(n - 1))?;
        sum += mu + sigma * z;
        mean = sum / n as f64;
        let b = boundary(sigma, n);
        if mean > b {
            return Ok(StoppingPathResult {
                stopped: true,
                stop_n: Some(n),
                final_mean: mean,
                boundary_at_stop: b,
            });
        }
    }
    Ok(StoppingPathResult {
        stopped: false,
        stop_n: None,
        final_mean: mean,
        boundary_at_stop: boundary(sigma, n_max),
    })
}

fn check_design(sigma: f64, n_max: u32) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be positive")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    Ok(())
}

/// The generator for one replication of a seeded study.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Standard normal deviates from a replication's stream.
pub fn replication_noise(seed: u64, replication: u64) -> impl Iterator<Item = f64> {
    let mut rng = replication_rng(seed, replication);
    std::iter::repeat_with(move || rng.sample(StandardNormal))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingStudy {
    pub n_replications: u32,
    pub seed: u64,
    pub n_max: u32,
    pub sigma: f64,
    /// Number of null paths that stopped by `n_max`.
    pub stopped: u32,
    /// Cumulative fraction of paths stopped by each n = 1, …, n_max.
    pub stop_fraction_by_n: BTreeMap<u32, f64>,
    /// Binomial standard error of the fraction stopped by `n_max`.
    pub standard_error: f64,
}

impl StoppingStudy {
    pub fn final_fraction(&self) -> f64 {
        self.stopped as f64 / self.n_replications as f64
    }

    pub fn fraction_by(&self, n: u32) -> Option<f64> {
        self.stop_fraction_by_n.get(&n).copied()
    }
}

/// Runs `reps` null (μ = 0) paths and tabulates when they stop.
pub fn stop_fraction(sigma: f64, n_max: u32, reps: u32, seed: u64) -> Result<StoppingStudy> {
    check_study(sigma, n_max, reps)?;
    let stops: Vec<Option<u32>> = (0..reps)
        .into_par_iter()
        .map(|i| run_null_path(sigma, n_max, seed, i))
        .collect::<Result<_>>()?;
    Ok(tabulate(sigma, n_max, reps, seed, &stops))
}

/// [`stop_fraction`] on a dedicated pool of `threads` workers.
pub fn stop_fraction_with_threads(
    sigma: f64,
    n_max: u32,
    reps: u32,
    seed: u64,
    threads: usize,
) -> Result<StoppingStudy> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| stop_fraction(sigma, n_max, reps, seed))
}

fn check_study(sigma: f64, n_max: u32, reps: u32) -> Result<()> {
    check_design(sigma, n_max)?;
    if reps < MIN_REPLICATIONS {
        return Err(Error::InvalidArgument(format!(
            "{reps} replications; at least {MIN_REPLICATIONS} required"
        )));
    }
    Ok(())
}

fn run_null_path(sigma: f64, n_max: u32, seed: u64, replication: u32) -> Result<Option<u32>> {
    Ok(simulate_path(0.0, sigma, n_max, replication_noise(seed, replication as u64))?.stop_n)
}

fn tabulate(sigma: f64, n_max: u32, reps: u32, seed: u64, stops: &[Option<u32>]) -> StoppingStudy {
    let mut first_stops = vec![0u32; n_max as usize + 1];
    for n in stops.iter().flatten() {
        first_stops[*n as usize] += 1;
    }
    let mut cumulative = 0u32;
    let mut by_n = BTreeMap::new();
    for n in 1..=n_max {
        cumulative += first_stops[n as usize];
        by_n.insert(n, cumulative as f64 / reps as f64);
    }
    let p = cumulative as f64 / reps as f64;
    StoppingStudy {
        n_replications: reps,
        seed,
        n_max,
        sigma,
        stopped: cumulative,
        stop_fraction_by_n: by_n,
        standard_error: (p * (1.0 - p) / reps as f64).sqrt(),
    }
}

/// The fixed-n experiment whose outcome at the boundary has the same
/// likelihood as an optional-stopping run that stopped at `stop_n`.
///
/// The stopping experiment in the pair is truncated at `stop_n`.
pub fn slp_partner_for_stop(stop_n: u32, sigma: f64) -> Result<SlpPair> {
    check_design(sigma, stop_n)?;
    let mean = boundary(sigma, stop_n);
    let fixed = Record::new(
        ExperimentModel::normal_fixed_n(stop_n, sigma)?,
        Outcome::normal(mean, stop_n),
    )?;
    let stopping = Record::new(
        ExperimentModel::normal_optional_stopping(sigma, stop_n)?,
        Outcome::normal(mean, stop_n),
    )?;
    let grid = [-1.0, 0.0, 1.0].map(ParamValue::Mu);
    check_slp_pair(&fixed, &stopping, &grid)?
        .ok_or_else(|| Error::InvalidPair(format!("fixed-n partner for a stop at n = {stop_n}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;

    #[test]
    fn strong_drift_stops_immediately() {
        let r = simulate_path(2.0, 1.0, 50, std::iter::repeat(0.0)).unwrap();
        assert_eq!(r.stop_n, Some(1));
        assert!(r.stopped);
        assert_eq!(r.final_mean, 2.0);
        assert_eq!(r.boundary_at_stop, 1.96);
    }

    #[test]
    fn zero_noise_at_the_null_never_stops() {
        let r = simulate_path(0.0, 1.0, 200, std::iter::repeat(0.0)).unwrap();
        assert!(!r.stopped);
        assert_eq!(r.stop_n, None);
        assert_eq!(r.final_mean, 0.0);
        assert!((r.boundary_at_stop - 1.96 / 200f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tie_with_the_boundary_does_not_stop() {
        let r = simulate_path(0.0, 1.0, 1, [1.96]).unwrap();
        assert!(!r.stopped);
    }

    #[test]
    fn paths_are_reproducible() {
        let a = simulate_path(0.0, 3.0, 500, replication_noise(9, 4)).unwrap();
        let b = simulate_path(0.0, 3.0, 500, replication_noise(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stop_implies_first_crossing() {
        for rep in 0..200 {
            let draws: Vec<f64> = replication_noise(1, rep).take(300).collect();
            let r = simulate_path(0.0, 1.0, 300, draws.iter().copied()).unwrap();
            if let Some(n) = r.stop_n {
                assert!(r.final_mean > boundary(1.0, n));
                let mut sum = 0.0;
                for (k, z) in draws.iter().take(n as usize - 1).enumerate() {
                    sum += z;
                    assert!(sum / (k + 1) as f64 <= boundary(1.0, k as u32 + 1));
                }
            }
        }
    }

    #[test]
    fn short_noise_is_an_error() {
        assert_eq!(simulate_path(0.0, 1.0, 5, [0.0, 0.0]), Err(Error::NoiseExhausted(2)));
    }

    #[test]
    fn invalid_designs() {
        assert!(simulate_path(0.0, 0.0, 5, std::iter::repeat(0.0)).is_err());
        assert!(simulate_path(0.0, 1.0, 0, std::iter::repeat(0.0)).is_err());
        assert!(stop_fraction(1.0, 10, 99, 0).is_err());
        assert!(slp_partner_for_stop(0, 1.0).is_err());
    }

    #[test]
    fn study_fractions_are_cumulative() {
        let s = stop_fraction(1.0, 50, 2_000, 11).unwrap();
        let values: Vec<f64> = s.stop_fraction_by_n.values().copied().collect();
        assert_eq!(values.len(), 50);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.fraction_by(50), Some(s.final_fraction()));
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let one = stop_fraction_with_threads(1.0, 100, 1_000, 5, 1).unwrap();
        let many = stop_fraction_with_threads(1.0, 100, 1_000, 5, 4).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn partner_sits_on_the_boundary() {
        let pair = slp_partner_for_stop(169, 2.0).unwrap();
        assert_eq!(pair.first().model, ExperimentModel::NormalFixedN { n: 169, sigma: 2.0 });
        assert_eq!(pair.first().outcome, Outcome::normal(1.96 * 2.0 / 13.0, 169));
        assert!((pair.constant().to_f64() - 1.0).abs() < 1e-12);
        let unit = slp_partner_for_stop(1, 1.0).unwrap();
        assert_eq!(unit.first().outcome, Outcome::normal(1.96, 1));
        let _ = normal::sf(1.96);
    }
}
