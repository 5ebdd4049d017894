use super::normal::cauchy_decrease;
use super::state::{AcceptedTest, StepResult};
use super::stepsize::VarphiModel;
use super::termination::{evaluate_tests, le, model_reduction_holds, Candidate, TestContext};
use super::{LipschitzMode, SolverConfig};
use crate::linalg::{dot, norm2, norm_inf, residual_pair, CsrMatrix};

/// Relative slack for re-evaluated inequalities.
const SLACK: f64 = 1e-9;

/// Everything needed to re-verify an iteration from scratch.
pub struct InvariantInputs<'a> {
    pub cfg: &'a SolverConfig,
    pub c: &'a [f64],
    pub j: &'a CsrMatrix,
    /// Hessian at the accepted ladder rung.
    pub h: &'a CsrMatrix,
    pub y: &'a [f64],
    pub tau_prev: f64,
    pub xi_prev: f64,
    pub prev_residual_norm: Option<f64>,
    pub varphi: &'a VarphiModel,
    pub step: &'a StepResult,
}

/// Re-checks the per-iteration guarantees, returning a description of each
/// violation.
pub fn check_step_invariants(inp: &InvariantInputs<'_>) -> Vec<String> {
    let a = &inp.cfg.algorithm;
    let st = inp.step;
    let mut out = Vec::new();
    let c_norm = norm2(inp.c);

    let (lhs, rhs) = cauchy_decrease(inp.c, inp.j, &st.v, a.eps_c);
    if lhs < rhs - SLACK * c_norm.max(1e-300) {
        out.push(format!("(1) Cauchy decrease {lhs:e} < {rhs:e}"));
    }

    match residual_pair(inp.h, inp.j, &st.g, &st.v, inp.y, &st.u, &st.delta) {
        Ok((rho, r)) => {
            let scale = 1.0 + norm_inf(&st.rho).max(norm_inf(&st.g));
            let drift = rho.iter().zip(&st.rho).chain(r.iter().zip(&st.r)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            if drift > 1e-10 * scale {
                out.push(format!("(2) residual pair drift {drift:e}"));
            }
            let ctx = TestContext::new(&st.g, inp.c, inp.j, inp.h, &st.v, inp.y, inp.tau_prev, st.beta, inp.prev_residual_norm);
            let cand = Candidate { u: &st.u, delta: &st.delta, rho: &rho, r: &r };
            let report = evaluate_tests(&cand, &ctx, a, SLACK);
            let holds = match st.accepted_test {
                AcceptedTest::Tt1 => report.tt1(),
                AcceptedTest::Tt2 => report.tt2(),
            };
            if !holds {
                out.push(format!("(2) {:?} fails on recomputation: {report:?}", st.accepted_test));
            }
            let rhs_inf = norm_inf(&ctx.rhs_u());
            let cap = (a.kappa * rhs_inf).max(inp.cfg.solver.minres_abs_floor);
            let res_inf = norm_inf(&rho).max(norm_inf(&r));
            if !le(res_inf, cap, 1e-8) {
                out.push(format!("(2) residual infinity norm {res_inf:e} above {cap:e}"));
            }
        }
        Err(e) => out.push(format!("(2) residual recomputation failed: {e}")),
    }

    let jv = inp.j.apply(&st.v);
    let c_plus_jv_norm = norm2(&inp.c.iter().zip(&jv).map(|(p, q)| p + q).collect::<Vec<_>>());
    let uhu = dot(&st.u, &inp.h.apply(&st.u));
    if !model_reduction_holds(st.model_reduction, st.tau, uhu, dot(&st.u, &st.u), c_norm, c_plus_jv_norm, a, SLACK) {
        out.push("(3) model reduction condition fails at the updated merit parameter".into());
    }

    if !(norm2(&st.d) > 0.0) {
        out.push("(4) zero search direction".into());
    }

    if !le(st.alpha_min, st.alpha_suff, 1e-12) {
        out.push(format!("(5) α_min {:e} > α_suff {:e}", st.alpha_min, st.alpha_suff));
    }
    let phi = inp.varphi.eval(st.alpha);
    if phi > 1e-12 * inp.varphi.scale() {
        out.push(format!("(5) φ(α) = {phi:e} > 0"));
    }
    let alpha_max = st.alpha_min + a.theta * st.beta * st.beta;
    if !le(st.alpha, alpha_max, 1e-14) {
        out.push(format!("(5) α {:e} above α_max {alpha_max:e}", st.alpha));
    }

    for (name, new, old, eps) in [("τ", st.tau, inp.tau_prev, a.eps_tau), ("ξ", st.xi, inp.xi_prev, a.eps_xi)] {
        if new > old {
            out.push(format!("(6) {name} increased from {old:e} to {new:e}"));
        } else if new < old && !le(new, (1.0 - eps) * old, 1e-14) {
            out.push(format!("(6) {name} decrease {old:e} -> {new:e} is not geometric"));
        }
    }

    if !(st.model_reduction > 0.0) {
        out.push(format!("(7) model reduction {:e} not positive", st.model_reduction));
    }

    if st.xi_trial < st.xi {
        out.push(format!("(8) ξ_trial {:e} < ξ {:e}", st.xi_trial, st.xi));
    }

    if matches!(a.lipschitz, LipschitzMode::Fixed { .. }) && !st.merit_bound_held {
        out.push("merit decrease bound fails with the fixed Lipschitz constants".into());
    }
    out
}
