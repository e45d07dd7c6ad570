//! Result files.
//!
//! For a batch of `function` at dimension `D` written to `dir`:
//!
//! - `dir/<function>_D<D>.csv`: header `function,dim,run,seed,fes_used,best_error,terminated`,
//!   one row per trial in run order;
//! - `dir/<function>_D<D>_summary.json`: the [`TrialSummary`] plus identifying fields;
//! - `dir/traces/<function>_D<D>_run<NNN>.csv`: header `fes,min_error,std_error`.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trials::{TrialResult, TrialSummary};
use crate::engine::Termination;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: [&str; 7] = [
    "function",
    "dim",
    "run",
    "seed",
    "fes_used",
    "best_error",
    "terminated",
];
pub const TRACE_HEADER: [&str; 3] = ["fes", "min_error", "std_error"];

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub function: String,
    pub dim: usize,
    pub runs: usize,
    pub successes: usize,
    pub summary: TrialSummary,
}

/// Paths written by [`write_results`].
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub results_csv: PathBuf,
    pub summary_json: PathBuf,
    pub traces: Vec<PathBuf>,
}

pub fn results_path(dir: &Path, function: &str, dim: usize) -> PathBuf {
    dir.join(format!("{function}_D{dim}.csv"))
}

pub fn write_results(
    results: &[TrialResult],
    summary: &TrialSummary,
    function: &str,
    dim: usize,
    dir: impl AsRef<Path>,
) -> Result<WrittenFiles> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("no results to write".into()));
    }
    let dir = dir.as_ref();
    let trace_dir = dir.join("traces");
    fs::create_dir_all(&trace_dir).map_err(|e| Error::io(&trace_dir, e))?;

    let results_csv = results_path(dir, function, dim);
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Csv { path, source }
    };
    let mut w = csv::Writer::from_path(&results_csv).map_err(csv_err(&results_csv))?;
    w.write_record(RESULTS_HEADER).map_err(csv_err(&results_csv))?;
    for r in results {
        w.write_record([
            function.to_string(),
            dim.to_string(),
            r.run_index.to_string(),
            r.seed.to_string(),
            r.fes_used.to_string(),
            format_real(r.best_error),
            r.terminated.as_str().to_string(),
        ])
        .map_err(csv_err(&results_csv))?;
    }
    w.flush().map_err(|e| Error::io(&results_csv, e))?;

    let summary_json = dir.join(format!("{function}_D{dim}_summary.json"));
    let file = SummaryFile {
        function: function.to_string(),
        dim,
        runs: results.len(),
        successes: super::trials::success_count(results),
        summary: *summary,
    };
    let text = serde_json::to_string_pretty(&file).expect("summary serializes");
    fs::write(&summary_json, text + "\n").map_err(|e| Error::io(&summary_json, e))?;

    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        let path = trace_dir.join(format!("{function}_D{dim}_run{:03}.csv", r.run_index));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        w.write_record(TRACE_HEADER).map_err(csv_err(&path))?;
        for p in &r.trace {
            w.write_record([p.fes.to_string(), format_real(p.min_error), format_real(p.std_error)])
                .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        traces.push(path);
    }
    Ok(WrittenFiles {
        results_csv,
        summary_json,
        traces,
    })
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRow {
    pub function: String,
    pub dim: usize,
    pub run: usize,
    pub seed: u64,
    pub fes_used: u64,
    pub best_error: f64,
    pub terminated: Termination,
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    r.deserialize()
        .map(|row| {
            row.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trace::TracePoint;
    use crate::harness::trials::summarize;

    fn batch(n: usize) -> Vec<TrialResult> {
        (0..n)
            .map(|i| TrialResult {
                run_index: i,
                seed: 1000 + i as u64,
                best_error: 1.0 / 3.0 * (i as f64 + 1.0) * 1e-5,
                fes_used: 100 * (i as u64 + 1),
                terminated: if i % 2 == 0 {
                    Termination::TargetReached
                } else {
                    Termination::BudgetExhausted
                },
                trace: vec![TracePoint { fes: 100, min_error: 0.1, std_error: 0.2 }],
            })
            .collect()
    }

    #[test]
    fn thirty_rows_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let results = batch(30);
        let summary = summarize(&results).unwrap();
        let files = write_results(&results, &summary, "f1", 10, dir.path()).unwrap();
        let rows = read_results(&files.results_csv).unwrap();
        assert_eq!(rows.len(), 30);
        for (row, r) in rows.iter().zip(&results) {
            assert_eq!(row.best_error.to_bits(), r.best_error.to_bits());
            assert_eq!((row.run, row.seed, row.fes_used), (r.run_index, r.seed, r.fes_used));
            assert_eq!(row.terminated, r.terminated);
        }
        assert_eq!(files.traces.len(), 30);
        let trace = fs::read_to_string(&files.traces[0]).unwrap();
        assert!(trace.starts_with("fes,min_error,std_error\n100,"));
        let header = fs::read_to_string(&files.results_csv).unwrap();
        assert!(header.starts_with("function,dim,run,seed,fes_used,best_error,terminated\n"));
        let json: SummaryFile =
            serde_json::from_str(&fs::read_to_string(&files.summary_json).unwrap()).unwrap();
        assert_eq!(json.summary, summary);
        assert_eq!(json.successes, 15);
    }

    #[test]
    fn empty_results_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = TrialSummary { min: 0.0, max: 0.0, median: 0.0, mean: 0.0, std: 0.0 };
        assert!(matches!(
            write_results(&[], &s, "f1", 10, dir.path()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unwritable_directory_reports_path() {
        let results = batch(1);
        let s = summarize(&results).unwrap();
        let err = write_results(&results, &s, "f1", 10, "/proc/definitely/not/here").unwrap_err();
        assert!(err.to_string().contains("/proc/definitely/not/here"), "{err}");
    }
}
