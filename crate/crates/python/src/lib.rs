use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use sisqo::engine::{LipschitzMode, SolverConfig};
use sisqo::harness::{
    kkt_metrics, run_budget_matched_pair, run_sweep, run_with, select_exact_iterate, write_outputs,
    ExperimentConfig, IterateMetrics, RunOptions, STRATEGY_EXACT, STRATEGY_INEXACT,
};
use sisqo::library::{build_control, CircleProblem, ControlProblemSpec, ControlVariant, SyntheticQp, SyntheticQpSpec};
use sisqo::linalg::CsrMatrix;
use sisqo::problem::{self as model, OracleKind};
use std::sync::Arc;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable value into plain Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; a.cols()]; a.rows()];
    for (i, j, v) in a.iter() {
        rows[i][j] += v;
    }
    rows
}

fn check_len(x: &[f64], n: usize, what: &str) -> PyResult<()> {
    if x.len() != n {
        return Err(value_err(format!("{what} has length {}, expected {n}", x.len())));
    }
    Ok(())
}

fn parse_oracle(kind: &str, eps_n: f64) -> PyResult<OracleKind> {
    match kind {
        "exact" => Ok(OracleKind::Exact),
        "gaussian" => Ok(OracleKind::Gaussian { eps_n }),
        "finite_sum" => Ok(OracleKind::FiniteSum),
        other => Err(value_err(format!("unknown oracle '{other}' (exact, gaussian, finite_sum)"))),
    }
}

/// An equality-constrained test problem.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: Arc<dyn model::Problem>,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    #[pyo3(signature = (n, m, seed = 0, condition = 10.0, curvature_floor = 1.0))]
    fn synthetic(n: usize, m: usize, seed: u64, condition: f64, curvature_floor: f64) -> PyResult<Self> {
        let spec = SyntheticQpSpec { n, m, seed, condition, curvature_floor };
        Ok(Self { inner: Arc::new(SyntheticQp::new(&spec).map_err(value_err)?) })
    }

    /// `variant` is "poisson_distributed" or "neumann_boundary".
    #[staticmethod]
    #[pyo3(signature = (variant, grid, eps_n, terms = None, lambda_ = None))]
    fn control(variant: &str, grid: usize, eps_n: f64, terms: Option<usize>, lambda_: Option<f64>) -> PyResult<Self> {
        let variant = match variant {
            "poisson_distributed" | "poisson" => ControlVariant::PoissonDistributed,
            "neumann_boundary" | "neumann" => ControlVariant::NeumannBoundary,
            other => return Err(value_err(format!("unknown control variant '{other}'"))),
        };
        let mut spec = ControlProblemSpec::new(variant, grid, eps_n);
        if let Some(t) = terms {
            spec.terms = t;
        }
        if let Some(l) = lambda_ {
            spec.lambda = l;
        }
        Ok(Self { inner: build_control(&spec).map_err(value_err)? })
    }

    #[staticmethod]
    fn circle() -> Self {
        Self { inner: Arc::new(CircleProblem) }
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn num_variables(&self) -> usize {
        self.inner.num_variables()
    }

    #[getter]
    fn num_constraints(&self) -> usize {
        self.inner.num_constraints()
    }

    fn initial_point(&self) -> Vec<f64> {
        self.inner.initial_point()
    }

    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        check_len(&x, self.inner.num_variables(), "x")?;
        Ok(self.inner.objective(&x))
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        check_len(&x, self.inner.num_variables(), "x")?;
        Ok(self.inner.gradient(&x))
    }

    fn constraints(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        check_len(&x, self.inner.num_variables(), "x")?;
        Ok(self.inner.constraints(&x))
    }

    /// Dense `m × n` Jacobian as a list of rows.
    fn jacobian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        check_len(&x, self.inner.num_variables(), "x")?;
        Ok(dense(&self.inner.jacobian(&x)))
    }

    fn lagrangian_hessian(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        check_len(&x, self.inner.num_variables(), "x")?;
        check_len(&y, self.inner.num_constraints(), "y")?;
        Ok(dense(&self.inner.lagrangian_hessian(&x, &y)))
    }

    /// `(x*, y*)` when the problem has a closed-form solution.
    fn known_solution(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        self.inner.known_solution().map(|s| (s.x, s.y))
    }

    /// `(feasibility error, stationarity error, least-squares multipliers)` at `x`.
    #[pyo3(signature = (x, lsq_tol = 1e-12))]
    fn kkt_metrics(&self, x: Vec<f64>, lsq_tol: f64) -> PyResult<(f64, f64, Vec<f64>)> {
        check_len(&x, self.inner.num_variables(), "x")?;
        Ok(kkt_metrics(self.inner.as_ref(), &x, lsq_tol))
    }

    fn __repr__(&self) -> String {
        format!("Problem({}, n={}, m={})", self.inner.name(), self.inner.num_variables(), self.inner.num_constraints())
    }
}

/// Algorithm and solver parameters.
#[pyclass(name = "SolverConfig", skip_from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    inner: SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[staticmethod]
    fn general() -> Self {
        Self { inner: SolverConfig::general() }
    }

    #[staticmethod]
    fn control() -> Self {
        Self { inner: SolverConfig::control() }
    }

    fn with_kappa(&self, kappa: f64) -> Self {
        Self { inner: self.inner.clone().with_kappa(kappa) }
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.algorithm.kappa
    }

    #[setter]
    fn set_kappa(&mut self, kappa: f64) {
        self.inner.algorithm.kappa = kappa;
    }

    #[getter]
    fn max_outer_iterations(&self) -> usize {
        self.inner.solver.max_outer_iterations
    }

    #[setter]
    fn set_max_outer_iterations(&mut self, n: usize) {
        self.inner.solver.max_outer_iterations = n;
    }

    #[getter]
    fn feas_tol(&self) -> f64 {
        self.inner.solver.feas_tol
    }

    #[setter]
    fn set_feas_tol(&mut self, tol: f64) {
        self.inner.solver.feas_tol = tol;
    }

    #[getter]
    fn stat_tol(&self) -> f64 {
        self.inner.solver.stat_tol
    }

    #[setter]
    fn set_stat_tol(&mut self, tol: f64) {
        self.inner.solver.stat_tol = tol;
    }

    /// Uses `L` and `Γ` as given instead of estimating them.
    fn fix_lipschitz(&mut self, l: f64, gamma: f64) {
        self.inner.algorithm.lipschitz = LipschitzMode::Fixed { l, gamma };
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("SolverConfig(kappa={:e}, max_outer_iterations={})", self.inner.algorithm.kappa, self.inner.solver.max_outer_iterations)
    }
}

/// Solves `problem` once and returns the run record as a dict.
#[pyfunction]
#[pyo3(signature = (problem, config, oracle = "exact", eps_n = 0.0, seed = 0))]
fn solve<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    config: &PySolverConfig,
    oracle: &str,
    eps_n: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = parse_oracle(oracle, eps_n)?;
    let (p, cfg) = (problem.inner.clone(), config.inner.clone());
    let opts = RunOptions { strategy: Some(STRATEGY_INEXACT.into()), eps_n, ..Default::default() };
    let record = py.detach(move || run_with(p.as_ref(), &cfg, kind, seed, &opts));
    to_py(py, &record)
}

/// Runs `inexact` to termination, then `exact` until it has spent the same
/// number of MINRES iterations. `exact` defaults to `inexact` with `κ = 1e-7`.
#[pyfunction]
#[pyo3(signature = (problem, inexact, exact = None, oracle = "exact", eps_n = 0.0, seed = 0))]
fn compare<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    inexact: &PySolverConfig,
    exact: Option<&PySolverConfig>,
    oracle: &str,
    eps_n: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = parse_oracle(oracle, eps_n)?;
    let p = problem.inner.clone();
    let cfg_in = inexact.inner.clone();
    let cfg_ex = exact.map(|c| c.inner.clone()).unwrap_or_else(|| cfg_in.clone().with_kappa(1e-7));
    let opts = RunOptions { eps_n, ..Default::default() };
    let pair = py
        .detach(move || run_budget_matched_pair(p.as_ref(), &cfg_in, &cfg_ex, kind, seed, &opts))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &pair)
}

/// Runs the experiment described by TOML text. With `stem`, the outputs are
/// also written under the configured output directory.
#[pyfunction]
#[pyo3(signature = (toml_text, overrides = Vec::new(), compare = None, stem = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    toml_text: &str,
    overrides: Vec<String>,
    compare: Option<bool>,
    stem: Option<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(toml_text, &overrides).map_err(value_err)?;
    let compare = compare.unwrap_or(cfg.harness.compare);
    let outcome = py
        .detach(|| run_sweep(&cfg, compare))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    if let Some(stem) = stem {
        write_outputs(&outcome, &cfg, &stem).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    }
    to_py(py, &outcome)
}

/// Parses and validates a config, returning the resolved settings.
#[pyfunction]
#[pyo3(signature = (toml_text, overrides = Vec::new()))]
fn load_config<'py>(py: Python<'py>, toml_text: &str, overrides: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(toml_text, &overrides).map_err(value_err)?;
    let out = to_py(py, &cfg)?;
    out.set_item("config_hash", cfg.config_hash())?;
    Ok(out)
}

/// Index of the reported iterate given per-iterate `(feas_err, stat_err)`.
#[pyfunction]
fn select_iterate(history: Vec<(f64, f64)>, feas_tol: f64) -> Option<usize> {
    let metrics: Vec<IterateMetrics> = history
        .into_iter()
        .enumerate()
        .map(|(k, (feas_err, stat_err))| IterateMetrics { k, feas_err, stat_err })
        .collect();
    select_exact_iterate(&metrics, feas_tol)
}

/// Tracking target of term `(i, j)` at the point `(x1, x2)`.
#[pyfunction]
#[pyo3(signature = (i, j, n, eps_n, x1, x2, eps_s = 15f64.sqrt()))]
fn reference_function_value(i: usize, j: usize, n: usize, eps_n: f64, x1: f64, x2: f64, eps_s: f64) -> f64 {
    sisqo::library::reference_function_value(i, j, n, eps_n, eps_s, x1, x2)
}

#[pymodule]
#[pyo3(name = "sisqo")]
fn sisqo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    m.add_function(wrap_pyfunction!(select_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(reference_function_value, m)?)?;
    m.add("STRATEGY_INEXACT", STRATEGY_INEXACT)?;
    m.add("STRATEGY_EXACT", STRATEGY_EXACT)?;
    Ok(())
}
