//! Seeded trial batches, summary statistics, convergence traces, timing and
//! result files.

mod complexity;
mod output;
pub mod trace;
mod trials;

pub use complexity::{
    measure_complexity, reference_loop, ComplexityReport, COMPLEXITY_FES, COMPLEXITY_RUNS, TIMING_REPEATS,
};
pub use output::{
    format_real, read_results, results_path, write_results, ResultRow, SummaryFile, WrittenFiles,
    RESULTS_HEADER, TRACE_HEADER,
};
pub use trace::{record_trace, TracePoint, TraceSchedule};
pub use trials::{
    best_trial, run_trials, success_count, summarize, summarize_values, trial_seed, TrialResult,
    TrialSummary,
};
