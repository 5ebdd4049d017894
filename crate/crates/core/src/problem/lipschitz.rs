use super::Problem;
use crate::linalg::{norm2, sub};
use crate::rng::RunRng;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    /// Gradient Lipschitz estimate.
    pub l: f64,
    /// Jacobian Lipschitz estimate (Frobenius).
    pub gamma: f64,
}

pub fn default_probe_radius(x: &[f64]) -> f64 {
    1e-4 * norm2(x).max(1.0)
}

/// Secant estimates of `L` and `Γ` between `x` and a point drawn uniformly
/// from the ball of radius `probe_radius` around it. Both are floored at
/// `floor`.
pub fn estimate_lipschitz(
    problem: &dyn Problem,
    x: &[f64],
    probe_radius: f64,
    floor: f64,
    rng: &mut RunRng,
) -> LipschitzEstimate {
    assert!(probe_radius > 0.0, "probe radius must be positive");
    let n = x.len();
    let mut dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let dn = norm2(&dir);
    let u: f64 = rng.random();
    let radius = probe_radius * u.powf(1.0 / n as f64);
    dir.iter_mut().for_each(|d| *d *= radius / dn);
    let probe: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b).collect();
    let dist = norm2(&sub(&probe, x));
    if dist == 0.0 {
        return LipschitzEstimate { l: floor, gamma: floor };
    }

    let l = norm2(&sub(&problem.gradient(&probe), &problem.gradient(x))) / dist;
    let jdiff = problem
        .jacobian(&probe)
        .linear_combination(1.0, &problem.jacobian(x), -1.0)
        .expect("Jacobian shape is fixed");
    let gamma = jdiff.frobenius_norm() / dist;
    LipschitzEstimate { l: l.max(floor), gamma: gamma.max(floor) }
}
