//! Python bindings for the optimizer, the benchmark registry and the trial harness.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sabres_core::benchmarks::registry;
use sabres_core::{engine, harness, Error, ObjectiveSpec, SabresConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv { .. } | Error::InvariantViolation(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Optimizer settings. Keyword overrides use the same keys as the CLI `--set`.
#[pyclass(name = "Config", module = "sabres", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: SabresConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (dim = 10, **overrides))]
    fn new(dim: usize, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = SabresConfig::for_dimension(dim);
        if let Some(kw) = overrides {
            for (key, value) in kw.iter() {
                let key: String = key.extract()?;
                let text = value.str()?.to_string();
                // Python spells booleans with a capital letter
                let text = match text.as_str() {
                    "True" => "true".to_string(),
                    "False" => "false".to_string(),
                    _ => text,
                };
                inner.set(&key, &text).map_err(to_py)?;
            }
        }
        Ok(Self { inner })
    }

    /// Sets one field from its string form, e.g. `cfg.set("p", "0.7")`.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(to_py)
    }

    #[getter]
    fn trajectories(&self) -> usize {
        self.inner.trajectories
    }

    #[getter]
    fn realizations(&self) -> usize {
        self.inner.realizations
    }

    #[getter]
    fn initial_gain(&self) -> f64 {
        self.inner.initial_gain
    }

    #[getter]
    fn gain_power(&self) -> f64 {
        self.inner.gain_power
    }

    #[getter]
    fn max_fes(&self) -> u64 {
        self.inner.max_fes
    }

    #[getter]
    fn target_error(&self) -> f64 {
        self.inner.target_error
    }

    #[getter]
    fn exploration(&self) -> bool {
        self.inner.exploration
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(n={}, m={}, g0={}, p={}, max_fes={}, exploration={})",
            self.inner.trajectories,
            self.inner.realizations,
            self.inner.initial_gain,
            self.inner.gain_power,
            self.inner.max_fes,
            self.inner.exploration
        )
    }
}

/// A registered benchmark function instance.
#[pyclass(name = "Objective", module = "sabres", from_py_object)]
#[derive(Clone)]
struct PyObjective {
    inner: ObjectiveSpec,
}

#[pymethods]
impl PyObjective {
    #[new]
    fn new(id: &str, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: registry::build(id, dim).map_err(to_py)?,
        })
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&x).map_err(to_py)
    }

    /// Error value `max(f(x) - f_star, 1e-8)`.
    fn error(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.error_at(&x).map_err(to_py)
    }

    fn optimizer(&self) -> Vec<f64> {
        self.inner.optimizer()
    }

    #[getter]
    fn id(&self) -> &str {
        &self.inner.id
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn f_star(&self) -> f64 {
        self.inner.f_star
    }

    #[getter]
    fn bounds(&self) -> (f64, f64) {
        (self.inner.lower_bound, self.inner.upper_bound)
    }

    fn __repr__(&self) -> String {
        format!("Objective({:?}, dim={})", self.inner.id, self.inner.dim)
    }
}

/// Outcome of one optimizer run.
#[pyclass(name = "RunResult", module = "sabres", get_all)]
struct PyRunResult {
    seed: u64,
    best_error: f64,
    best_value: Option<f64>,
    best_position: Option<Vec<f64>>,
    fes_used: u64,
    iterations: Option<u64>,
    termination: &'static str,
    /// `(fes, min_error, std_error)` checkpoints.
    trace: Vec<(u64, f64, f64)>,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn reached_target(&self) -> bool {
        self.termination == engine::Termination::TargetReached.as_str()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(best_error={:e}, fes_used={}, termination={:?})",
            self.best_error, self.fes_used, self.termination
        )
    }
}

fn trace_tuples(trace: &[harness::TracePoint]) -> Vec<(u64, f64, f64)> {
    trace.iter().map(|t| (t.fes, t.min_error, t.std_error)).collect()
}

/// Runs the optimizer once.
#[pyfunction]
fn run(py: Python<'_>, config: PyConfig, objective: PyObjective, seed: u64) -> PyResult<PyRunResult> {
    let r = py
        .detach(|| engine::run(&config.inner, &objective.inner, seed))
        .map_err(to_py)?;
    Ok(PyRunResult {
        seed,
        best_error: r.best_error,
        best_value: Some(r.best_value),
        best_position: Some(r.best_position),
        fes_used: r.fes_used,
        iterations: Some(r.iterations),
        termination: r.termination.as_str(),
        trace: trace_tuples(&r.trace),
    })
}

/// Runs a seeded batch; results are ordered by run index.
#[pyfunction]
fn run_trials(
    py: Python<'_>,
    config: PyConfig,
    objective: PyObjective,
    base_seed: u64,
    runs: usize,
) -> PyResult<Vec<PyRunResult>> {
    let results = py
        .detach(|| harness::run_trials(&config.inner, &objective.inner, base_seed, runs))
        .map_err(to_py)?;
    Ok(results
        .into_iter()
        .map(|r| PyRunResult {
            seed: r.seed,
            best_error: r.best_error,
            best_value: None,
            best_position: None,
            fes_used: r.fes_used,
            iterations: None,
            termination: r.terminated.as_str(),
            trace: trace_tuples(&r.trace),
        })
        .collect())
}

/// Min, max, median, mean and sample std of a list of errors.
#[pyfunction]
fn summarize<'py>(py: Python<'py>, errors: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let s = harness::summarize_values(&errors).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("min", s.min)?;
    d.set_item("max", s.max)?;
    d.set_item("median", s.median)?;
    d.set_item("mean", s.mean)?;
    d.set_item("std", s.std)?;
    Ok(d)
}

/// `(id, description)` for every registered objective.
#[pyfunction]
fn list_functions() -> Vec<(&'static str, &'static str)> {
    registry::describe()
}

#[pymodule]
fn sabres(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyObjective>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(list_functions, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
