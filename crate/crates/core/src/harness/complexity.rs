use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchmarks::registry;
use crate::engine::{self, SabresConfig};
use crate::error::Result;
use crate::rng::RandomStream;

/// Evaluations timed for `T1` and budget of each timed run for `T2`.
pub const COMPLEXITY_FES: u64 = 200_000;
/// Runs averaged into `T2_hat`.
pub const COMPLEXITY_RUNS: usize = 5;

/// Timing of the reference loop (`t0`), of bare evaluations of `f1` (`t1`) and
/// of full optimizer runs on `f1` (`t2_hat`), in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub dim: usize,
    pub t0: f64,
    pub t1: f64,
    pub t2_hat: f64,
    /// `(t2_hat - t1) / t0`.
    pub metric: f64,
}

/// The reference arithmetic loop: one million iterations of
/// `x = 0.55 + i; x += x; x /= 2; x *= x; x = sqrt(x); x = ln(x); x = exp(x); x /= x + 2`.
pub fn reference_loop() -> f64 {
    let mut acc = 0.0;
    for i in 1..=1_000_000u32 {
        let mut x = 0.55 + black_box(i) as f64;
        x = x + x;
        x /= 2.0;
        x *= x;
        x = x.sqrt();
        x = x.ln();
        x = x.exp();
        x /= x + 2.0;
        acc += x;
    }
    black_box(acc)
}

/// Repetitions of the `T0` and `T1` loops; the fastest one is reported.
pub const TIMING_REPEATS: usize = 5;

fn seconds<F: FnMut()>(mut f: F) -> f64 {
    (0..TIMING_REPEATS)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Measures all three timings on the calling thread. `T0` and `T1` are the
/// fastest of [`TIMING_REPEATS`] repetitions. Each `T2` run uses the
/// per-dimension defaults with a 2e5 budget and no early stop.
pub fn measure_complexity(dim: usize, stream: &mut RandomStream) -> Result<ComplexityReport> {
    let spec = registry::build("f1", dim)?;

    let t0 = seconds(|| {
        reference_loop();
    });

    let points = (0..64)
        .map(|_| {
            (0..dim)
                .map(|_| stream.uniform(spec.lower_bound, spec.upper_bound))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut eval_err = None;
    let t1 = seconds(|| {
        if eval_err.is_some() {
            return;
        }
        for e in 0..COMPLEXITY_FES as usize {
            match spec.eval(black_box(&points[e % points.len()])) {
                Ok(v) => {
                    black_box(v);
                }
                Err(err) => {
                    eval_err = Some(err);
                    return;
                }
            }
        }
    });
    if let Some(err) = eval_err {
        return Err(err);
    }

    let mut config = SabresConfig::for_dimension(dim);
    config.max_fes = COMPLEXITY_FES;
    config.target_error = f64::MIN_POSITIVE;
    let mut total = 0.0;
    for _ in 0..COMPLEXITY_RUNS {
        let seed = stream.index(usize::MAX)? as u64;
        let start = Instant::now();
        black_box(engine::run(&config, &spec, seed)?);
        total += start.elapsed().as_secs_f64();
    }
    let t2_hat = total / COMPLEXITY_RUNS as f64;

    Ok(ComplexityReport {
        dim,
        t0,
        t1,
        t2_hat,
        metric: (t2_hat - t1) / t0,
    })
}
