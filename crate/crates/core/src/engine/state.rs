use super::SolverConfig;
use crate::linalg::CsrMatrix;
use crate::problem::Problem;
use serde::Serialize;

/// Primal-dual iterate plus the algorithm's adaptive parameters.
///
/// `c` and `j` are cached at `x`. `beta`, `l` and `gamma` hold the values
/// used by the step that produced this state (initial values at `k = 0`).
#[derive(Debug, Clone)]
pub struct IterateState {
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
    pub xi: f64,
    pub beta: f64,
    pub l: f64,
    pub gamma: f64,
    pub c: Vec<f64>,
    pub j: CsrMatrix,
    /// `‖(g_{k-1} + J_{k-1}ᵀ y_k; c_{k-1})‖`, absent at `k = 0`.
    pub prev_residual_norm: Option<f64>,
}

impl IterateState {
    pub fn new(problem: &dyn Problem, x: Vec<f64>, y: Vec<f64>, cfg: &SolverConfig) -> Self {
        let c = problem.constraints(&x);
        let j = problem.jacobian(&x);
        Self {
            k: 0,
            x,
            y,
            tau: cfg.algorithm.tau_init,
            xi: cfg.algorithm.xi_init,
            beta: cfg.algorithm.beta.at(0),
            l: f64::NAN,
            gamma: f64::NAN,
            c,
            j,
            prev_residual_norm: None,
        }
    }

    /// Starts from the problem's initial point with zero multipliers.
    pub fn initial(problem: &dyn Problem, cfg: &SolverConfig) -> Self {
        Self::new(problem, problem.initial_point(), vec![0.0; problem.num_constraints()], cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AcceptedTest {
    #[serde(rename = "TT1")]
    Tt1,
    #[serde(rename = "TT2")]
    Tt2,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepResult {
    pub k: usize,
    pub g: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub delta: Vec<f64>,
    pub d: Vec<f64>,
    pub rho: Vec<f64>,
    pub r: Vec<f64>,
    pub accepted_test: AcceptedTest,
    /// `None` stands for `+∞`.
    pub tau_trial: Option<f64>,
    pub tau: f64,
    pub xi_trial: f64,
    pub xi: f64,
    pub beta: f64,
    pub l: f64,
    pub gamma: f64,
    pub model_reduction: f64,
    pub alpha_min: f64,
    pub alpha_suff: f64,
    pub alpha: f64,
    pub minres_iters: usize,
    pub cg_iters: usize,
    pub hessian_rung: usize,
    pub resampled: bool,
    pub invariant_violations: Vec<String>,
    /// Whether the merit decrease bound with the constants in use held.
    pub merit_bound_held: bool,
}
