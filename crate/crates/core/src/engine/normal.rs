use super::{EngineError, Result, SolverConfig};
use crate::linalg::{cg_normal_solve, dot, norm2, CsrMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalStep {
    pub v: Vec<f64>,
    pub jv: Vec<f64>,
    pub cg_iters: usize,
    /// `‖c‖ - ‖c + J v‖`
    pub decrease: f64,
    /// `ε_c (‖c‖ - ‖c + α^c J v^c‖)`
    pub cauchy_bound: f64,
}

/// Both sides of the Cauchy decrease condition for `v`:
/// `(‖c‖ - ‖c + J v‖, ε_c (‖c‖ - ‖c + α^c J v^c‖))` with `v^c = -Jᵀc`.
pub fn cauchy_decrease(c: &[f64], j: &CsrMatrix, v: &[f64], eps_c: f64) -> (f64, f64) {
    let c_norm = norm2(c);
    let jv = j.apply(v);
    let lhs = c_norm - norm2(&shifted(c, 1.0, &jv));
    (lhs, eps_c * cauchy_reference(c, j, c_norm))
}

fn shifted(c: &[f64], alpha: f64, w: &[f64]) -> Vec<f64> {
    c.iter().zip(w).map(|(a, b)| a + alpha * b).collect()
}

fn cauchy_point(c: &[f64], j: &CsrMatrix) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let mut vc = j.apply_transpose(c);
    vc.iter_mut().for_each(|a| *a = -*a);
    let jvc = j.apply(&vc);
    let den = dot(&jvc, &jvc);
    if den == 0.0 {
        return None;
    }
    let alpha = dot(&vc, &vc) / den;
    Some((vc, alpha, jvc))
}

/// `‖c‖ - ‖c + α^c J v^c‖`, zero when `Jᵀc = 0`.
fn cauchy_reference(c: &[f64], j: &CsrMatrix, c_norm: f64) -> f64 {
    match cauchy_point(c, j) {
        Some((_, alpha, jvc)) => c_norm - norm2(&shifted(c, alpha, &jvc)),
        None => 0.0,
    }
}

/// Inexact minimizer of `½‖c + J v‖²` over `Range(Jᵀ)` by CG on the normal
/// equations, certified against the Cauchy decrease condition.
///
/// If CG stops before its first iteration while `Jᵀc ≠ 0` (the absolute floor
/// was met), the Cauchy step itself is used; it is CG's first iterate.
pub fn compute_normal_step(c: &[f64], j: &CsrMatrix, cfg: &SolverConfig) -> Result<NormalStep> {
    let n = j.cols();
    let s = &cfg.solver;
    let c_norm = norm2(c);
    if c_norm == 0.0 {
        return Ok(NormalStep { v: vec![0.0; n], jv: vec![0.0; c.len()], cg_iters: 0, decrease: 0.0, cauchy_bound: 0.0 });
    }
    let (mut v, mut iters) = match cg_normal_solve(j, c, s.cg_rel_tol, s.cg_abs_floor, s.cg_cap(c.len())) {
        Ok(out) => (out.solution, out.iterations),
        Err(LinalgError::NotConverged { iterations, best, .. }) => {
            log::debug!("normal-step CG stopped after {iterations} iterations; using best iterate");
            (best, iterations)
        }
        Err(e) => return Err(e.into()),
    };
    let cauchy = cauchy_point(c, j);
    if iters == 0 {
        if let Some((vc, alpha, _)) = &cauchy {
            v = vc.iter().map(|a| alpha * a).collect();
            iters = 1;
        }
    }
    let jv = j.apply(&v);
    let decrease = c_norm - norm2(&shifted(c, 1.0, &jv));
    let cauchy_bound = cfg.algorithm.eps_c
        * match &cauchy {
            Some((_, alpha, jvc)) => c_norm - norm2(&shifted(c, *alpha, jvc)),
            None => 0.0,
        };
    if decrease < cauchy_bound - 1e-12 * c_norm {
        return Err(EngineError::InvariantBreach(format!(
            "normal step violates Cauchy decrease: {decrease:e} < {cauchy_bound:e}"
        )));
    }
    Ok(NormalStep { v, jv, cg_iters: iters, decrease, cauchy_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use rand::Rng;

    #[test]
    fn zero_constraints_give_zero_step() {
        let j = CsrMatrix::from_dense(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let out = compute_normal_step(&[0.0, 0.0], &j, &SolverConfig::general()).unwrap();
        assert_eq!(out.v, vec![0.0; 3]);
        assert_eq!(out.cg_iters, 0);
    }

    #[test]
    fn identity_jacobian() {
        let j = CsrMatrix::identity(2);
        let out = compute_normal_step(&[3.0, 4.0], &j, &SolverConfig::general()).unwrap();
        assert!((out.v[0] + 3.0).abs() < 1e-14 && (out.v[1] + 4.0).abs() < 1e-14);
        assert!((out.decrease - 5.0).abs() < 1e-14);
        assert!(out.cauchy_bound <= 5.0 + 1e-14);
    }

    #[test]
    fn random_wide_jacobian_certified() {
        let mut rng = stream_rng(11, Stream::ProblemGeneration);
        let mut cfg = SolverConfig::general();
        cfg.algorithm.eps_c = 1.0;
        for _ in 0..20 {
            let data: Vec<f64> = (0..24).map(|_| rng.random_range(-1.0..1.0)).collect();
            let j = CsrMatrix::from_dense(3, 8, &data).unwrap();
            let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let out = compute_normal_step(&c, &j, &cfg).unwrap();
            // independent evaluation of the Cauchy side
            let jtc = j.apply_transpose(&c);
            let jjtc = j.apply(&jtc);
            let alpha = dot(&jtc, &jtc) / dot(&jjtc, &jjtc);
            let cn = norm2(&c);
            let rhs = cn - norm2(&c.iter().zip(&jjtc).map(|(a, b)| a - alpha * b).collect::<Vec<_>>());
            let (lhs, rhs2) = cauchy_decrease(&c, &j, &out.v, 1.0);
            assert!((rhs - rhs2).abs() < 1e-14);
            assert!(lhs >= rhs - 1e-12, "{lhs} < {rhs}");
        }
    }

    #[test]
    fn tiny_residual_still_takes_cauchy_step() {
        let j = CsrMatrix::identity(2);
        let out = compute_normal_step(&[1e-12, 0.0], &j, &SolverConfig::general()).unwrap();
        assert_eq!(out.cg_iters, 1);
        assert!((out.v[0] + 1e-12).abs() < 1e-26);
    }
}
