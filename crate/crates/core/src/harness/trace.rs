use serde::{Deserialize, Serialize};

use crate::benchmarks::{error_value, ObjectiveSpec};
use crate::engine::EngineState;
use crate::error::Result;

/// Population snapshot: evaluations so far, and the minimum and standard
/// deviation of the particles' (floored) errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub fes: u64,
    pub min_error: f64,
    pub std_error: f64,
}

/// Snapshot of the current population. The standard deviation uses divisor `N`.
pub fn record_trace(state: &EngineState, spec: &ObjectiveSpec) -> Result<TracePoint> {
    let errors = state
        .fitness()
        .iter()
        .map(|&f| error_value(f, spec.f_star))
        .collect::<Result<Vec<_>>>()?;
    Ok(trace_point(state.fes_used, &errors))
}

pub(crate) fn trace_point(fes: u64, errors: &[f64]) -> TracePoint {
    let n = errors.len() as f64;
    let min_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
    // centred on the minimum so identical errors give exactly zero spread
    let mean_offset = errors.iter().map(|e| e - min_error).sum::<f64>() / n;
    let var = errors
        .iter()
        .map(|e| (e - min_error - mean_offset).powi(2))
        .sum::<f64>()
        / n;
    TracePoint {
        fes,
        min_error,
        std_error: var.sqrt(),
    }
}

/// Geometric checkpoints `batch * ceil(10^(j/8))`, `j = 0, 1, ...`, up to the budget.
#[derive(Debug, Clone)]
pub struct TraceSchedule {
    checkpoints: Vec<u64>,
    next: usize,
}

impl TraceSchedule {
    pub fn new(batch: u64, max_fes: u64) -> Self {
        let mut checkpoints: Vec<u64> = Vec::new();
        for j in 0.. {
            let multiple = 10f64.powf(j as f64 / 8.0).ceil() as u64;
            let fes = batch.saturating_mul(multiple);
            if fes > max_fes {
                break;
            }
            if checkpoints.last() != Some(&fes) {
                checkpoints.push(fes);
            }
        }
        Self {
            checkpoints,
            next: 0,
        }
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    /// True when `fes` has reached the next pending checkpoint. Consumes every
    /// checkpoint at or below `fes`.
    pub fn due(&mut self, fes: u64) -> bool {
        let mut hit = false;
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] <= fes {
            hit = true;
            self.next += 1;
        }
        hit
    }
}
