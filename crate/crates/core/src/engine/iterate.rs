use super::invariants::{check_step_invariants, InvariantInputs};
use super::normal::compute_normal_step;
use super::state::{AcceptedTest, IterateState, StepResult};
use super::stepsize::{select_step_size, step_size_bounds, VarphiModel};
use super::termination::{evaluate_tests, Candidate, TestContext};
use super::{tau_trial_and_update, xi_update, DualUpdate, EngineError, LipschitzMode, Result, SolverConfig};
use crate::linalg::{
    dot, least_squares_multipliers, norm2, norm_inf, stacked_norm2, CsrMatrix, KktOperator, MinresOptions, MinresState,
};
use crate::problem::{estimate_lipschitz, GradientOracle, HessianLadder, Problem};
use crate::rng::RunRng;

/// Outcome of one call to [`sqp_iterate`].
#[derive(Debug, Clone)]
pub enum Iteration {
    Step { next: IterateState, step: Box<StepResult> },
    /// `c = 0` and the sampled gradient lies in `Range(Jᵀ)`, so no
    /// termination test can be met.
    Stationary { resampled: bool },
}

/// `y + δ`, or the least-squares multipliers when they do not increase
/// `‖g + Jᵀy‖` relative to `y + δ`.
pub fn update_duals(
    y: &[f64],
    delta: &[f64],
    g: &[f64],
    j: &CsrMatrix,
    mode: DualUpdate,
    lsq_tol: f64,
) -> Result<Vec<f64>> {
    let newton: Vec<f64> = y.iter().zip(delta).map(|(a, b)| a + b).collect();
    if mode == DualUpdate::Newton {
        return Ok(newton);
    }
    let dual_norm = |w: &[f64]| {
        let mut r = g.to_vec();
        j.apply_transpose_add(w, &mut r);
        norm2(&r)
    };
    let y_ls = match least_squares_multipliers(j, g, lsq_tol) {
        Ok(out) => out.solution,
        Err(crate::linalg::LinalgError::NotConverged { best, .. }) => best,
        Err(e) => return Err(e.into()),
    };
    Ok(if dual_norm(&y_ls) <= dual_norm(&newton) { y_ls } else { newton })
}

fn is_stationary(g: &[f64], c: &[f64], j: &CsrMatrix, cfg: &SolverConfig) -> Result<bool> {
    let tol = cfg.solver.stationary_tol;
    if norm_inf(c) > tol {
        return Ok(false);
    }
    let y_ls = match least_squares_multipliers(j, g, cfg.solver.lsq_tol) {
        Ok(out) => out.solution,
        Err(crate::linalg::LinalgError::NotConverged { best, .. }) => best,
        Err(e) => return Err(e.into()),
    };
    let mut r = g.to_vec();
    j.apply_transpose_add(&y_ls, &mut r);
    Ok(norm2(&r) <= tol)
}

struct Accepted {
    h: CsrMatrix,
    rung: usize,
    test: AcceptedTest,
    u: Vec<f64>,
    delta: Vec<f64>,
    rho: Vec<f64>,
    r: Vec<f64>,
}

/// One full iteration from `state`.
///
/// `probe_rng` drives the Lipschitz probes in estimate mode; the oracle owns
/// its own stream.
pub fn sqp_iterate(
    state: &IterateState,
    problem: &dyn Problem,
    oracle: &mut GradientOracle,
    probe_rng: &mut RunRng,
    cfg: &SolverConfig,
) -> Result<Iteration> {
    let a = &cfg.algorithm;
    let s = &cfg.solver;
    let (n, m) = (problem.num_variables(), problem.num_constraints());
    let x = &state.x;
    let (c, j) = (&state.c, &state.j);
    let beta = a.beta.at(state.k);

    let (l, gamma) = match a.lipschitz {
        LipschitzMode::Fixed { l, gamma } => (l, gamma),
        LipschitzMode::Estimate { probe_scale, floor } => {
            let radius = probe_scale * norm2(x).max(1.0);
            let est = estimate_lipschitz(problem, x, radius, floor, probe_rng);
            (est.l, est.gamma)
        }
    };

    let normal = compute_normal_step(c, j, cfg)?;
    let v = normal.v;

    let mut g = oracle.sample(problem, x);
    let mut resampled = false;
    if is_stationary(&g, c, j, cfg)? {
        if oracle.is_stochastic() && s.resample_on_stationary {
            g = oracle.sample(problem, x);
            resampled = true;
            if is_stationary(&g, c, j, cfg)? {
                return Ok(Iteration::Stationary { resampled });
            }
        } else {
            return Ok(Iteration::Stationary { resampled });
        }
    }

    let hessian = problem.lagrangian_hessian(x, &state.y);
    let ladder = HessianLadder::new(s.hessian_max_rung);
    let cap = s.minres_cap(n, m);
    let opts = MinresOptions { breakdown_tol: s.breakdown_tol, refresh_interval: s.minres_refresh_interval };
    let mut minres_iters = 0;
    let mut accepted: Option<Accepted> = None;

    for rung in 0..=ladder.final_rung() {
        let h = ladder.matrix(rung, &hessian);
        let found = {
            let ctx = TestContext::new(&g, c, j, &h, &v, &state.y, state.tau, beta, state.prev_residual_norm);
            let rhs_u = ctx.rhs_u();
            let inf_cap = (a.kappa * norm_inf(&rhs_u)).max(s.minres_abs_floor);
            let op = KktOperator::new(&h, j)?;
            let mut mr = MinresState::for_kkt(&op, &rhs_u, &vec![0.0; m], opts)?;
            let mut found = None;
            loop {
                let exhausted = mr.is_broken_down() || mr.iteration() >= cap;
                if exhausted || mr.iteration() % s.tt_check_stride == 0 {
                    let cand = Candidate { u: mr.u(), delta: mr.delta(), rho: mr.rho(), r: mr.r() };
                    if norm_inf(mr.residual()) <= inf_cap {
                        let report = evaluate_tests(&cand, &ctx, a, 0.0);
                        let test = if report.tt1() {
                            Some(AcceptedTest::Tt1)
                        } else if report.tt2() {
                            Some(AcceptedTest::Tt2)
                        } else {
                            None
                        };
                        if let Some(test) = test {
                            found = Some((test, mr.u().to_vec(), mr.delta().to_vec(), mr.rho().to_vec(), mr.r().to_vec()));
                            break;
                        }
                    }
                }
                if exhausted {
                    break;
                }
                mr.step();
            }
            minres_iters += mr.iteration();
            found
        };
        match found {
            Some((test, u, delta, rho, r)) => {
                accepted = Some(Accepted { h, rung, test, u, delta, rho, r });
                break;
            }
            None => log::debug!("iteration {}: Hessian rung {rung} exhausted", state.k),
        }
    }
    let Accepted { h, rung, test, u, delta, rho, r } = accepted.ok_or(EngineError::TangentialFailure {
        iteration: state.k,
        rungs: ladder.final_rung() + 1,
        minres_iterations: minres_iters,
    })?;

    let d: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a + b).collect();
    let (tau_trial, tau) = match test {
        AcceptedTest::Tt1 => (None, state.tau),
        AcceptedTest::Tt2 => tau_trial_and_update(state.tau, &g, &d, &u, &h, c, j, &v, &r, a)?,
    };
    let jd = j.apply(&d);
    let c_norm = norm2(c);
    let c_plus_jd_norm = norm2(&c.iter().zip(&jd).map(|(a, b)| a + b).collect::<Vec<_>>());
    let dl = -tau * dot(&g, &d) + c_norm - c_plus_jd_norm;
    let (xi_trial, xi) = xi_update(state.xi, tau, dl, &d, a)?;
    let (alpha_min, alpha_suff) = step_size_bounds(tau, xi, beta, dl, &d, l, gamma, a)?;
    let d_norm_sq = dot(&d, &d);
    let varphi = VarphiModel::new(a.eta, beta, dl, tau * l + gamma, c, &jd, d_norm_sq);
    let alpha = select_step_size(alpha_min, alpha_suff, beta, a.theta, |t| varphi.eval(t));

    let x_next: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
    let y_next = update_duals(&state.y, &delta, &g, j, a.dual_update, s.lsq_tol)?;
    let mut dual_res = g.clone();
    j.apply_transpose_add(&y_next, &mut dual_res);
    let prev_residual_norm = Some(stacked_norm2(&dual_res, c));

    let c_next = problem.constraints(&x_next);
    let merit_bound_held = {
        let grad = problem.gradient(x);
        let dl_true = -tau * dot(&grad, &d) + c_norm - c_plus_jd_norm;
        let lhs = tau * (problem.objective(&x_next) - problem.objective(x)) + norm2(&c_next) - c_norm;
        let rhs = -alpha * dl_true + ((1.0 - alpha).abs() - (1.0 - alpha)) * c_norm
            + 0.5 * (tau * l + gamma) * alpha * alpha * d_norm_sq;
        lhs <= rhs + 1e-10 * (1.0 + c_norm + (tau * problem.objective(x)).abs())
    };

    let mut step = StepResult {
        k: state.k,
        g,
        v,
        u,
        delta,
        d,
        rho,
        r,
        accepted_test: test,
        tau_trial,
        tau,
        xi_trial,
        xi,
        beta,
        l,
        gamma,
        model_reduction: dl,
        alpha_min,
        alpha_suff,
        alpha,
        minres_iters,
        cg_iters: normal.cg_iters,
        hessian_rung: rung,
        resampled,
        invariant_violations: Vec::new(),
        merit_bound_held,
    };
    if s.check_invariants {
        step.invariant_violations = check_step_invariants(&InvariantInputs {
            cfg,
            c,
            j,
            h: &h,
            y: &state.y,
            tau_prev: state.tau,
            xi_prev: state.xi,
            prev_residual_norm: state.prev_residual_norm,
            varphi: &varphi,
            step: &step,
        });
        if !step.invariant_violations.is_empty() {
            log::warn!("iteration {}: invariant violations {:?}", state.k, step.invariant_violations);
        }
    }

    let next = IterateState {
        k: state.k + 1,
        j: problem.jacobian(&x_next),
        x: x_next,
        y: y_next,
        tau,
        xi,
        beta,
        l,
        gamma,
        c: c_next,
        prev_residual_norm,
    };
    Ok(Iteration::Step { next, step: Box::new(step) })
}
