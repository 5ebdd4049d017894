//! The equality-constrained problem abstraction and the machinery that sits
//! directly on top of it: stochastic gradient oracles, the Hessian
//! modification ladder and finite-difference Lipschitz estimates.

mod checks;
mod ladder;
mod lipschitz;
mod oracle;

pub use checks::{derivative_report, gradient_check, hessian_check, jacobian_check, DerivativeReport};
pub use ladder::HessianLadder;
pub use lipschitz::{default_probe_radius, estimate_lipschitz, LipschitzEstimate};
pub use oracle::{
    declared_variance, finite_sum_oracle_sample, full_finite_sum_gradient, gaussian_oracle_sample, GradientOracle,
    OracleKind,
};

use crate::linalg::{CsrMatrix, LinalgError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("oracle configuration: {0}")]
    Oracle(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A primal-dual point satisfying the first-order conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct KktPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// `min f(x)  s.t.  c(x) = 0` with `f: Rⁿ → R`, `c: Rⁿ → Rᵐ`, `m <= n`.
///
/// `gradient` is the *true* gradient. Algorithms that only see stochastic
/// gradients get them through a [`GradientOracle`]; the true gradient is
/// used for metrics and for the exact oracle.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;
    fn num_variables(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn initial_point(&self) -> Vec<f64>;
    fn objective(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn constraints(&self, x: &[f64]) -> Vec<f64>;
    /// `m x n` constraint Jacobian.
    fn jacobian(&self, x: &[f64]) -> CsrMatrix;
    /// Hessian of `f(x) + c(x)ᵀ y` with respect to `x`.
    fn lagrangian_hessian(&self, x: &[f64], y: &[f64]) -> CsrMatrix;

    fn known_solution(&self) -> Option<KktPair> {
        None
    }

    /// Present when the objective is an average of `N²` terms that can be
    /// differentiated individually.
    fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        None
    }

    /// Free-form key/value facts about the instance (discretization, scaling).
    fn notes(&self) -> Vec<(String, String)> {
        Vec::new()
    }
}

/// `f(x) = (1/N²) Σ_{i,j=1..N} f_ij(x)`.
pub trait FiniteSum: Send + Sync {
    /// `N`, the number of terms per index.
    fn terms_per_axis(&self) -> usize;
    /// Gradient of `f_ij` for 1-based `i, j`.
    fn term_gradient(&self, i: usize, j: usize, x: &[f64]) -> Vec<f64>;
}

/// `∇f(x) + J(x)ᵀ y`
pub fn lagrangian_gradient(problem: &dyn Problem, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut g = problem.gradient(x);
    problem.jacobian(x).apply_transpose_add(y, &mut g);
    g
}
