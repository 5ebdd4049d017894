use crate::linalg::CsrMatrix;
use crate::problem::{KktPair, Problem};

/// `min x₁  s.t.  x₁² + x₂² - 1 = 0`, started from `(0, 1)`.
///
/// The minimizer is `(-1, 0)` with multiplier `1/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CircleProblem;

impl Problem for CircleProblem {
    fn name(&self) -> &str {
        "circle"
    }

    fn num_variables(&self) -> usize {
        2
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }

    fn objective(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        vec![1.0, 0.0]
    }

    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] + x[1] * x[1] - 1.0]
    }

    fn jacobian(&self, x: &[f64]) -> CsrMatrix {
        CsrMatrix::from_dense(1, 2, &[2.0 * x[0], 2.0 * x[1]]).expect("1x2")
    }

    fn lagrangian_hessian(&self, _x: &[f64], y: &[f64]) -> CsrMatrix {
        CsrMatrix::diagonal(&[2.0 * y[0], 2.0 * y[0]])
    }

    fn known_solution(&self) -> Option<KktPair> {
        Some(KktPair { x: vec![-1.0, 0.0], y: vec![0.5] })
    }
}
