use super::{AlgorithmParams, EngineError, Result};
use crate::linalg::{dot, norm2, CsrMatrix};

/// The strongly convex upper model `φ(α)` with its `α`-independent parts
/// precomputed.
#[derive(Debug, Clone)]
pub struct VarphiModel {
    eta: f64,
    beta: f64,
    dl: f64,
    curvature: f64,
    d_norm_sq: f64,
    c: Vec<f64>,
    jd: Vec<f64>,
    c_norm: f64,
    c_plus_jd_norm: f64,
}

impl VarphiModel {
    /// `curvature = τL + Γ`.
    pub fn new(eta: f64, beta: f64, dl: f64, curvature: f64, c: &[f64], jd: &[f64], d_norm_sq: f64) -> Self {
        let c_norm = norm2(c);
        let c_plus_jd_norm = norm2(&c.iter().zip(jd).map(|(a, b)| a + b).collect::<Vec<_>>());
        Self { eta, beta, dl, curvature, d_norm_sq, c: c.to_vec(), jd: jd.to_vec(), c_norm, c_plus_jd_norm }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let moved = norm2(&self.c.iter().zip(&self.jd).map(|(a, b)| a + alpha * b).collect::<Vec<_>>());
        (self.eta - 1.0) * alpha * self.beta * self.dl + moved - self.c_norm
            + alpha * (self.c_norm - self.c_plus_jd_norm)
            + 0.5 * self.curvature * alpha * alpha * self.d_norm_sq
    }

    /// Rounding scale of `eval`, for tolerance-aware comparisons.
    pub fn scale(&self) -> f64 {
        self.c_norm + self.dl.abs() + self.curvature * self.d_norm_sq + 1.0
    }
}

/// `φ(α) = (η-1)αβΔl + ‖c + αJd‖ - ‖c‖ + α(‖c‖ - ‖c + Jd‖) + ½(τL+Γ)α²‖d‖²`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_varphi(
    alpha: f64,
    beta: f64,
    tau: f64,
    dl_g: f64,
    c: &[f64],
    j: &CsrMatrix,
    d: &[f64],
    l: f64,
    gamma: f64,
    p: &AlgorithmParams,
) -> f64 {
    VarphiModel::new(p.eta, beta, dl_g, tau * l + gamma, c, &j.apply(d), dot(d, d)).eval(alpha)
}

/// `(α_min, α_suff)`. `α_min` is clamped to at most 1.
#[allow(clippy::too_many_arguments)]
pub fn step_size_bounds(
    tau: f64,
    xi: f64,
    beta: f64,
    dl_g: f64,
    d: &[f64],
    l: f64,
    gamma: f64,
    p: &AlgorithmParams,
) -> Result<(f64, f64)> {
    let curvature = tau * l + gamma;
    if !(curvature > 0.0) {
        return Err(EngineError::Config(format!("τL + Γ must be positive, got {curvature:e}")));
    }
    let dd = dot(d, d);
    if !(dd > 0.0) || !(dl_g > 0.0) {
        return Err(EngineError::InvariantBreach("step size bounds need ‖d‖ > 0 and Δl > 0".into()));
    }
    let factor = 2.0 * (1.0 - p.eta) * beta;
    let alpha_suff = (factor * dl_g / (curvature * dd)).min(1.0);
    let alpha_min = (factor * xi * tau / curvature).min(1.0);
    Ok((alpha_min, alpha_suff))
}

/// Three-case step-size rule. In the expansion case the step grows by
/// factors of 1.1 from `α_suff` while `φ ≤ 0`, the step stays at most
/// `α_min + θβ²`, and the previous trial was below 1.
pub fn select_step_size<F: Fn(f64) -> f64>(alpha_min: f64, alpha_suff: f64, beta: f64, theta: f64, varphi: F) -> f64 {
    let alpha_max = alpha_min + theta * beta * beta;
    if alpha_suff >= 1.0 {
        return alpha_max.min(1.0);
    }
    if alpha_max <= alpha_suff {
        return alpha_max;
    }
    let mut alpha = alpha_suff;
    // 1.1^t overflows the step bound long before this cap for sane inputs
    for _ in 0..10_000 {
        let next = alpha * 1.1;
        if alpha >= 1.0 || next > alpha_max || varphi(next) > 0.0 {
            break;
        }
        alpha = next;
    }
    alpha
}
