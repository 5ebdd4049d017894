use super::{Problem, ProblemError};
use crate::linalg::{norm2, sub};
use crate::rng::RunRng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKind {
    /// The true gradient.
    Exact,
    /// `∇f(x) + z`, `z ~ N(0, (ε_N²/n) I)`.
    Gaussian { eps_n: f64 },
    /// Gradient of one uniformly drawn term of a finite-sum objective.
    FiniteSum,
}

/// A seeded stochastic gradient source. Each run owns one.
#[derive(Debug, Clone)]
pub struct GradientOracle {
    kind: OracleKind,
    rng: RunRng,
}

impl GradientOracle {
    pub fn new(kind: OracleKind, problem: &dyn Problem, rng: RunRng) -> Result<Self, ProblemError> {
        match kind {
            OracleKind::Gaussian { eps_n } if !(eps_n >= 0.0 && eps_n.is_finite()) => {
                Err(ProblemError::Oracle(format!("noise level must be finite and nonnegative, got {eps_n}")))
            }
            OracleKind::FiniteSum if problem.finite_sum().is_none() => Err(ProblemError::Oracle(format!(
                "problem '{}' does not expose finite-sum terms",
                problem.name()
            ))),
            _ => Ok(Self { kind, rng }),
        }
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self.kind, OracleKind::Exact | OracleKind::Gaussian { eps_n: 0.0 })
    }

    pub fn sample(&mut self, problem: &dyn Problem, x: &[f64]) -> Vec<f64> {
        match self.kind {
            OracleKind::Exact => problem.gradient(x),
            OracleKind::Gaussian { eps_n } => gaussian_oracle_sample(problem, x, eps_n, &mut self.rng),
            OracleKind::FiniteSum => finite_sum_oracle_sample(problem, x, &mut self.rng),
        }
    }
}

pub fn gaussian_oracle_sample(problem: &dyn Problem, x: &[f64], eps_n: f64, rng: &mut RunRng) -> Vec<f64> {
    let mut g = problem.gradient(x);
    if eps_n == 0.0 {
        return g;
    }
    let sd = eps_n / (g.len() as f64).sqrt();
    for gi in g.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *gi += sd * z;
    }
    g
}

/// # Panics
/// If the problem has no finite-sum structure.
pub fn finite_sum_oracle_sample(problem: &dyn Problem, x: &[f64], rng: &mut RunRng) -> Vec<f64> {
    let fs = problem.finite_sum().expect("finite-sum oracle on a problem without terms");
    let n = fs.terms_per_axis();
    let i = rng.random_range(1..=n);
    let j = rng.random_range(1..=n);
    fs.term_gradient(i, j, x)
}

/// Mean of all `N²` term gradients, computed by enumeration.
pub fn full_finite_sum_gradient(problem: &dyn Problem, x: &[f64]) -> Option<Vec<f64>> {
    let fs = problem.finite_sum()?;
    let n = fs.terms_per_axis();
    let mut acc = vec![0.0; x.len()];
    for i in 1..=n {
        for j in 1..=n {
            for (a, gi) in acc.iter_mut().zip(fs.term_gradient(i, j, x)) {
                *a += gi;
            }
        }
    }
    let w = 1.0 / (n * n) as f64;
    acc.iter_mut().for_each(|a| *a *= w);
    Some(acc)
}

/// Variance bound `M_g` reported alongside a run. The algorithm never reads
/// it. For finite sums this is the largest squared term-gradient deviation
/// at `x0`.
pub fn declared_variance(kind: OracleKind, problem: &dyn Problem, x0: &[f64]) -> f64 {
    match kind {
        OracleKind::Exact => 0.0,
        OracleKind::Gaussian { eps_n } => eps_n * eps_n,
        OracleKind::FiniteSum => {
            let Some(fs) = problem.finite_sum() else { return 0.0 };
            let full = problem.gradient(x0);
            let n = fs.terms_per_axis();
            let mut worst = 0.0_f64;
            for i in 1..=n {
                for j in 1..=n {
                    let d = norm2(&sub(&fs.term_gradient(i, j, x0), &full));
                    worst = worst.max(d * d);
                }
            }
            worst
        }
    }
}
