use super::{AlgorithmParams, EngineError, Result};
use crate::linalg::{dot, norm2, CsrMatrix};

/// `Δl(τ, g, d) = -τ gᵀd + ‖c‖ - ‖c + J d‖`.
pub fn model_reduction(tau: f64, g: &[f64], c: &[f64], j: &CsrMatrix, d: &[f64]) -> f64 {
    let jd = j.apply(d);
    let c_jd: Vec<f64> = c.iter().zip(&jd).map(|(a, b)| a + b).collect();
    -tau * dot(g, d) + norm2(c) - norm2(&c_jd)
}

/// Merit parameter update after a step accepted by the second termination
/// test. Returns `(τ_trial, τ_new)` with `None` standing for `τ_trial = +∞`.
#[allow(clippy::too_many_arguments)]
pub fn tau_trial_and_update(
    tau_prev: f64,
    g: &[f64],
    d: &[f64],
    u: &[f64],
    h: &CsrMatrix,
    c: &[f64],
    j: &CsrMatrix,
    v: &[f64],
    r: &[f64],
    p: &AlgorithmParams,
) -> Result<(Option<f64>, f64)> {
    let uhu = dot(u, &h.apply(u));
    let curvature = uhu.max(p.eps_u * dot(u, u));
    let denom = dot(g, d) + curvature;
    let trial = if denom <= 0.0 {
        None
    } else {
        let jv = j.apply(v);
        let c_after: Vec<f64> = c.iter().zip(&jv).zip(r).map(|((a, b), s)| a + b + s).collect();
        Some((1.0 - p.sigma_c / p.eps_r) * (norm2(c) - norm2(&c_after)) / denom)
    };
    let tau = tau_rule(tau_prev, trial, p.eps_tau);
    if !(tau > 0.0) {
        return Err(EngineError::InvariantBreach(format!("merit parameter became {tau:e}")));
    }
    Ok((trial, tau))
}

fn tau_rule(prev: f64, trial: Option<f64>, eps: f64) -> f64 {
    match trial {
        Some(t) if prev > t => ((1.0 - eps) * prev).min(t),
        _ => prev,
    }
}

/// Ratio parameter update. Returns `(ξ_trial, ξ_new)`.
pub fn xi_update(xi_prev: f64, tau: f64, dl: f64, d: &[f64], p: &AlgorithmParams) -> Result<(f64, f64)> {
    if !(dl > 0.0) {
        return Err(EngineError::InvariantBreach(format!("model reduction {dl:e} is not positive")));
    }
    let dd = dot(d, d);
    if !(dd > 0.0) {
        return Err(EngineError::InvariantBreach("search direction is zero".into()));
    }
    let trial = dl / (tau * dd);
    Ok((trial, tau_rule(xi_prev, Some(trial), p.eps_xi)))
}
