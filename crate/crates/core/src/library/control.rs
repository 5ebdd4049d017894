use crate::problem::ProblemError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlVariant {
    /// `-Δw = z` in the square, `w = 0` on its boundary.
    PoissonDistributed,
    /// `-Δw + w = 0` in the square, `∂w/∂p = z` on its boundary.
    NeumannBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlProblemSpec {
    pub variant: ControlVariant,
    /// Interior grid points per axis.
    pub grid: usize,
    /// `N`: the objective averages `N²` tracking terms.
    pub terms: usize,
    pub lambda: f64,
    pub eps_n: f64,
    pub eps_s: f64,
}

impl ControlProblemSpec {
    pub fn new(variant: ControlVariant, grid: usize, eps_n: f64) -> Self {
        Self { variant, grid, terms: 3, lambda: 1e-5, eps_n, eps_s: 15f64.sqrt() }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let bad = |msg: String| Err(ProblemError::InvalidSpec(msg));
        if self.grid < 2 {
            return bad(format!("grid must be at least 2, got {}", self.grid));
        }
        if self.terms == 0 {
            return bad("term count must be positive".into());
        }
        if !(self.lambda > 0.0) {
            return bad(format!("regularization must be positive, got {}", self.lambda));
        }
        if !(self.eps_n >= 0.0) || !self.eps_n.is_finite() {
            return bad(format!("noise scale must be nonnegative, got {}", self.eps_n));
        }
        if !(self.eps_s > 0.0) {
            return bad(format!("spread must be positive, got {}", self.eps_s));
        }
        Ok(())
    }

    pub(crate) fn h(&self) -> f64 {
        1.0 / (self.grid as f64 + 1.0)
    }

    /// Target `w̄_ij` sampled at `nodes`, for every `(i, j)` in row-major
    /// order of `(i, j)`.
    pub(crate) fn targets(&self, nodes: &[(f64, f64)]) -> Vec<Vec<f64>> {
        let n = self.terms;
        let mut out = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                out.push(
                    nodes
                        .iter()
                        .map(|&(x1, x2)| reference_function_value(i, j, n, self.eps_n, self.eps_s, x1, x2))
                        .collect(),
                );
            }
        }
        out
    }
}

/// `w̄_ij(x₁, x₂) = sin((4 + (ε_N/ε_S)(i - (N+1)/2)) x₁) + cos((3 + (ε_N/ε_S)(j - (N+1)/2)) x₂)`
/// for 1-based `i, j ∈ {1, …, N}`.
pub fn reference_function_value(i: usize, j: usize, n: usize, eps_n: f64, eps_s: f64, x1: f64, x2: f64) -> f64 {
    debug_assert!((1..=n).contains(&i) && (1..=n).contains(&j));
    let mid = (n as f64 + 1.0) / 2.0;
    let ratio = eps_n / eps_s;
    ((4.0 + ratio * (i as f64 - mid)) * x1).sin() + ((3.0 + ratio * (j as f64 - mid)) * x2).cos()
}
