//! Central finite-difference checks of a problem's derivative oracles.

use super::{lagrangian_gradient, Problem};
use crate::linalg::{norm_inf, sub};
use crate::rng::RunRng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Worst relative errors over all probed points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub gradient: f64,
    pub jacobian: f64,
    pub hessian: f64,
    pub hessian_symmetry: f64,
    pub points: usize,
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

/// `‖FD(f) - ∇f‖∞ / max(1, ‖∇f‖∞)` by central differences.
pub fn gradient_check(problem: &dyn Problem, x: &[f64], step: f64) -> f64 {
    let g = problem.gradient(x);
    let mut xp = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        xp[i] = x[i] + step;
        let fp = problem.objective(&xp);
        xp[i] = x[i] - step;
        let fm = problem.objective(&xp);
        xp[i] = x[i];
        worst = worst.max(((fp - fm) / (2.0 * step) - g[i]).abs());
    }
    relative(worst, norm_inf(&g))
}

/// Column-wise central differences of `c` against `J`.
pub fn jacobian_check(problem: &dyn Problem, x: &[f64], step: f64) -> f64 {
    let j = problem.jacobian(x);
    let mut scale = 0.0_f64;
    let mut worst = 0.0_f64;
    let mut xp = x.to_vec();
    for col in 0..x.len() {
        xp[col] = x[col] + step;
        let cp = problem.constraints(&xp);
        xp[col] = x[col] - step;
        let cm = problem.constraints(&xp);
        xp[col] = x[col];
        for row in 0..j.rows() {
            let fd = (cp[row] - cm[row]) / (2.0 * step);
            let exact = j.get(row, col);
            scale = scale.max(exact.abs());
            worst = worst.max((fd - exact).abs());
        }
    }
    relative(worst, scale)
}

/// Directional differences of `∇f + Jᵀy` against `∇²L d`.
pub fn hessian_check(problem: &dyn Problem, x: &[f64], y: &[f64], dir: &[f64], step: f64) -> f64 {
    let hd = problem.lagrangian_hessian(x, y).apply(dir);
    let xp: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + step * d).collect();
    let xm: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - step * d).collect();
    let fd: Vec<f64> = sub(&lagrangian_gradient(problem, &xp, y), &lagrangian_gradient(problem, &xm, y))
        .into_iter()
        .map(|v| v / (2.0 * step))
        .collect();
    relative(norm_inf(&sub(&fd, &hd)), norm_inf(&hd))
}

/// Runs all checks at `points` random perturbations of the initial point.
pub fn derivative_report(problem: &dyn Problem, points: usize, rng: &mut RunRng) -> DerivativeReport {
    let x0 = problem.initial_point();
    let m = problem.num_constraints();
    let mut report = DerivativeReport { points, ..Default::default() };
    for _ in 0..points {
        let x: Vec<f64> = x0.iter().map(|v| v + rng.sample::<f64, _>(StandardNormal) * 0.5).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let d: Vec<f64> = (0..x.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        report.gradient = report.gradient.max(gradient_check(problem, &x, 1e-6));
        report.jacobian = report.jacobian.max(jacobian_check(problem, &x, 1e-6));
        report.hessian = report.hessian.max(hessian_check(problem, &x, &y, &d, 1e-5));
        let h = problem.lagrangian_hessian(&x, &y);
        report.hessian_symmetry = report.hessian_symmetry.max(h.symmetry_defect().unwrap_or(f64::INFINITY));
    }
    report
}
