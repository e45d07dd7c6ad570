use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trace::TracePoint;
use crate::benchmarks::ObjectiveSpec;
use crate::engine::{self, SabresConfig, Termination};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Outcome of one seeded run in a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub run_index: usize,
    pub seed: u64,
    pub best_error: f64,
    pub fes_used: u64,
    pub terminated: Termination,
    pub trace: Vec<TracePoint>,
}

/// Order statistics and moments of a batch's best errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mean: f64,
    pub std: f64,
}

/// Seed of trial `run_index` in a batch started from `base_seed`.
pub fn trial_seed(base_seed: u64, run_index: usize) -> u64 {
    derive_seed(base_seed, run_index as u64)
}

/// Runs `runs` independent trials in parallel. Output is ordered by run index
/// and does not depend on scheduling.
pub fn run_trials(
    config: &SabresConfig,
    spec: &ObjectiveSpec,
    base_seed: u64,
    runs: usize,
) -> Result<Vec<TrialResult>> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    config.validate(spec.dim)?;
    (0..runs)
        .into_par_iter()
        .map(|run_index| {
            let seed = trial_seed(base_seed, run_index);
            let r = engine::run(config, spec, seed).map_err(|e| Error::Trial {
                index: run_index,
                source: Box::new(e),
            })?;
            Ok(TrialResult {
                run_index,
                seed,
                best_error: r.best_error,
                fes_used: r.fes_used,
                terminated: r.termination,
                trace: r.trace,
            })
        })
        .collect()
}

/// Min, max, median (midpoint average for even counts), mean and sample
/// standard deviation (divisor `runs - 1`, zero for a single run).
pub fn summarize(results: &[TrialResult]) -> Result<TrialSummary> {
    let errors: Vec<f64> = results.iter().map(|r| r.best_error).collect();
    summarize_values(&errors)
}

pub fn summarize_values(values: &[f64]) -> Result<TrialSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty batch".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let lo = sorted[0];
        let offset = sorted.iter().map(|v| v - lo).sum::<f64>() / n as f64;
        let ss = sorted.iter().map(|v| (v - lo - offset).powi(2)).sum::<f64>();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(TrialSummary {
        min: sorted[0],
        max: sorted[n - 1],
        median,
        // guards the min <= mean <= max invariant against summation rounding
        mean: mean.clamp(sorted[0], sorted[n - 1]),
        std,
    })
}

/// Trial with the lowest error, ties broken by fewest evaluations.
pub fn best_trial(results: &[TrialResult]) -> Option<&TrialResult> {
    results.iter().min_by(|a, b| {
        a.best_error
            .total_cmp(&b.best_error)
            .then(a.fes_used.cmp(&b.fes_used))
    })
}

/// Number of trials that reached the target.
pub fn success_count(results: &[TrialResult]) -> usize {
    results
        .iter()
        .filter(|r| r.terminated == Termination::TargetReached)
        .count()
}
