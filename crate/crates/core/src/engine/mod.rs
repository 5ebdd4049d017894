//! One iteration of the stochastic inexact SQP method and the formulas it
//! is built from.

mod config;
mod invariants;
mod iterate;
mod merit;
mod normal;
mod state;
mod stepsize;
mod termination;

pub use config::{AlgorithmParams, BetaSchedule, DualUpdate, LipschitzMode, Profile, SolverConfig, SolverParams};
pub use invariants::{check_step_invariants, InvariantInputs};
pub use iterate::{sqp_iterate, update_duals, Iteration};
pub use merit::{model_reduction, tau_trial_and_update, xi_update};
pub use normal::{cauchy_decrease, compute_normal_step, NormalStep};
pub use state::{AcceptedTest, IterateState, StepResult};
pub use stepsize::{evaluate_varphi, select_step_size, step_size_bounds, VarphiModel};
pub use termination::{
    check_model_reduction_condition, termination_test_1, termination_test_2, Candidate, TestContext, TestReport,
};

use crate::linalg::LinalgError;
use crate::problem::ProblemError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("iteration {iteration}: no termination test passed on any of {rungs} Hessian rungs ({minres_iterations} MINRES iterations)")]
    TangentialFailure { iteration: usize, rungs: usize, minres_iterations: usize },
    #[error("internal consistency failure: {0}")]
    InvariantBreach(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
