use super::AlgorithmParams;
use crate::linalg::{dot, norm2, stacked_norm2, CsrMatrix};
use serde::Serialize;

/// Quantities fixed for the duration of one tangential solve.
#[derive(Debug, Clone)]
pub struct TestContext<'a> {
    pub g: &'a [f64],
    pub c: &'a [f64],
    pub j: &'a CsrMatrix,
    pub h: &'a CsrMatrix,
    pub v: &'a [f64],
    pub y: &'a [f64],
    pub tau_prev: f64,
    pub beta: f64,
    /// `‖(g_{k-1} + J_{k-1}ᵀ y_k; c_{k-1})‖`; `None` acts as `+∞`.
    pub prev_residual_norm: Option<f64>,
    jv: Vec<f64>,
    g_plus_hv: Vec<f64>,
    g_plus_jty: Vec<f64>,
    c_norm: f64,
    c_plus_jv_norm: f64,
    v_norm: f64,
}

impl<'a> TestContext<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g: &'a [f64],
        c: &'a [f64],
        j: &'a CsrMatrix,
        h: &'a CsrMatrix,
        v: &'a [f64],
        y: &'a [f64],
        tau_prev: f64,
        beta: f64,
        prev_residual_norm: Option<f64>,
    ) -> Self {
        let jv = j.apply(v);
        let mut g_plus_hv = h.apply(v);
        g_plus_hv.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        let mut g_plus_jty = g.to_vec();
        j.apply_transpose_add(y, &mut g_plus_jty);
        let c_norm = norm2(c);
        let c_plus_jv_norm = norm2(&c.iter().zip(&jv).map(|(a, b)| a + b).collect::<Vec<_>>());
        Self {
            g,
            c,
            j,
            h,
            v,
            y,
            tau_prev,
            beta,
            prev_residual_norm,
            jv,
            g_plus_hv,
            g_plus_jty,
            c_norm,
            c_plus_jv_norm,
            v_norm: norm2(v),
        }
    }

    /// Right-hand side `g + H v + Jᵀ y` of the tangential system.
    pub fn rhs_u(&self) -> Vec<f64> {
        let mut rhs = self.g_plus_hv.clone();
        self.j.apply_transpose_add(self.y, &mut rhs);
        rhs
    }

    pub fn jv(&self) -> &[f64] {
        &self.jv
    }

    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    /// `‖c + J v‖`
    pub fn c_plus_jv_norm(&self) -> f64 {
        self.c_plus_jv_norm
    }
}

/// A tangential iterate `(u, δ)` with its residual pair `(ρ, r)`.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub u: &'a [f64],
    pub delta: &'a [f64],
    pub rho: &'a [f64],
    pub r: &'a [f64],
}

/// Outcome of each individual condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TestReport {
    /// `‖ρ‖ ≤ κ min{‖(g + Jᵀ(y+δ); c)‖, previous}`
    pub dual_residual: bool,
    /// `‖ρ‖ ≤ κ_ρ β` and `‖r‖ ≤ κ_r β`
    pub residual_bounds: bool,
    pub tangential: bool,
    /// Model reduction condition at `τ_prev`.
    pub model_reduction: bool,
    /// `‖c‖ - ‖c + J v + r‖ ≥ ε_r (‖c‖ - ‖c + J v‖) > 0`
    pub feasibility_retention: bool,
}

impl TestReport {
    pub fn tt1(&self) -> bool {
        self.dual_residual && self.residual_bounds && self.tangential && self.model_reduction
    }

    pub fn tt2(&self) -> bool {
        self.dual_residual && self.residual_bounds && self.tangential && self.feasibility_retention
    }
}

/// `a ≤ b` up to a relative slack (exact when `slack = 0`).
pub(crate) fn le(a: f64, b: f64, slack: f64) -> bool {
    a <= b + slack * a.abs().max(b.abs())
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn model_reduction_holds(
    dl: f64,
    tau: f64,
    uhu: f64,
    u_norm_sq: f64,
    c_norm: f64,
    c_plus_jv_norm: f64,
    p: &AlgorithmParams,
    slack: f64,
) -> bool {
    let rhs = p.sigma_u * tau * uhu.max(p.eps_u * u_norm_sq) + p.sigma_c * (c_norm - c_plus_jv_norm);
    le(rhs, dl, slack)
}

/// Evaluates every condition of both termination tests. `slack` relaxes
/// each non-strict inequality relatively; the algorithm uses 0.
pub fn evaluate_tests(cand: &Candidate<'_>, ctx: &TestContext<'_>, p: &AlgorithmParams, slack: f64) -> TestReport {
    let rho_norm = norm2(cand.rho);
    let r_norm = norm2(cand.r);

    let mut dual = ctx.g_plus_jty.clone();
    ctx.j.apply_transpose_add(cand.delta, &mut dual);
    let current = stacked_norm2(&dual, ctx.c);
    let reference = ctx.prev_residual_norm.map_or(current, |prev| current.min(prev));
    let dual_residual = le(rho_norm, p.kappa * reference, slack);

    let residual_bounds = le(rho_norm, p.kappa_rho * ctx.beta, slack) && le(r_norm, p.kappa_r * ctx.beta, slack);

    let hu = ctx.h.apply(cand.u);
    let uhu = dot(cand.u, &hu);
    let u_norm_sq = dot(cand.u, cand.u);
    let tangential = le(u_norm_sq.sqrt(), p.kappa_u * ctx.v_norm, slack)
        || (le(p.eps_u * u_norm_sq, uhu, slack)
            && le(dot(&ctx.g_plus_hv, cand.u) + 0.5 * uhu, p.kappa_v * ctx.v_norm, slack));

    let c_jd: Vec<f64> = ctx.c.iter().zip(&ctx.jv).zip(cand.r).map(|((a, b), r)| a + b + r).collect();
    let c_jd_norm = norm2(&c_jd);
    let gd = dot(ctx.g, ctx.v) + dot(ctx.g, cand.u);
    let dl = -ctx.tau_prev * gd + ctx.c_norm - c_jd_norm;
    let model_reduction =
        model_reduction_holds(dl, ctx.tau_prev, uhu, u_norm_sq, ctx.c_norm, ctx.c_plus_jv_norm, p, slack);

    let normal_decrease = ctx.c_norm - ctx.c_plus_jv_norm;
    let feasibility_retention =
        p.eps_r * normal_decrease > 0.0 && le(p.eps_r * normal_decrease, ctx.c_norm - c_jd_norm, slack);

    TestReport { dual_residual, residual_bounds, tangential, model_reduction, feasibility_retention }
}

pub fn termination_test_1(cand: &Candidate<'_>, ctx: &TestContext<'_>, p: &AlgorithmParams) -> bool {
    evaluate_tests(cand, ctx, p, 0.0).tt1()
}

pub fn termination_test_2(cand: &Candidate<'_>, ctx: &TestContext<'_>, p: &AlgorithmParams) -> bool {
    evaluate_tests(cand, ctx, p, 0.0).tt2()
}

/// `Δl(τ, g, v + u) ≥ σ_u τ max{uᵀHu, ε_u‖u‖²} + σ_c (‖c‖ - ‖c + J v‖)`,
/// evaluated from scratch.
#[allow(clippy::too_many_arguments)]
pub fn check_model_reduction_condition(
    tau: f64,
    g: &[f64],
    c: &[f64],
    j: &CsrMatrix,
    v: &[f64],
    u: &[f64],
    h: &CsrMatrix,
    p: &AlgorithmParams,
) -> bool {
    let d: Vec<f64> = v.iter().zip(u).map(|(a, b)| a + b).collect();
    let dl = super::model_reduction(tau, g, c, j, &d);
    let jv = j.apply(v);
    let c_norm = norm2(c);
    let c_plus_jv_norm = norm2(&c.iter().zip(&jv).map(|(a, b)| a + b).collect::<Vec<_>>());
    let uhu = dot(u, &h.apply(u));
    model_reduction_holds(dl, tau, uhu, dot(u, u), c_norm, c_plus_jv_norm, p, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::residual_pair;
    use crate::rng::{stream_rng, Stream};
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    fn params() -> AlgorithmParams {
        AlgorithmParams::default()
    }

    /// 6 variables, 2 constraints, positive definite `H`.
    fn instance(seed: u64) -> (CsrMatrix, CsrMatrix, Vec<f64>) {
        let mut rng = stream_rng(seed, Stream::ProblemGeneration);
        let a: Vec<f64> = (0..36).map(|_| rng.random_range(-1.0..1.0)).collect();
        let am = DMatrix::from_row_slice(6, 6, &a);
        let hm = &am * am.transpose() + DMatrix::identity(6, 6);
        let h = CsrMatrix::from_dense(6, 6, hm.transpose().as_slice()).unwrap();
        let jd: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let j = CsrMatrix::from_dense(2, 6, &jd).unwrap();
        let g: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        (h, j, g)
    }

    /// Dense solve of `[H Jᵀ; J 0](u, δ) = -(rhs, 0)`.
    fn dense_tangential(h: &CsrMatrix, j: &CsrMatrix, rhs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (h.rows(), j.rows());
        let mut k = DMatrix::zeros(n + m, n + m);
        for (r, c, v) in h.iter() {
            k[(r, c)] = v;
        }
        for (r, c, v) in j.iter() {
            k[(n + r, c)] = v;
            k[(c, n + r)] = v;
        }
        let mut b = DVector::zeros(n + m);
        for i in 0..n {
            b[i] = -rhs[i];
        }
        let z = k.lu().solve(&b).unwrap();
        (z.rows(0, n).iter().copied().collect(), z.rows(n, m).iter().copied().collect())
    }

    #[test]
    fn model_reduction_trivial_case() {
        let h = CsrMatrix::identity(2);
        let j = CsrMatrix::from_dense(1, 2, &[1.0, 0.0]).unwrap();
        assert!(check_model_reduction_condition(0.1, &[1.0, 0.0], &[0.0], &j, &[0.0; 2], &[0.0; 2], &h, &params()));
    }

    #[test]
    fn model_reduction_exact_solve_feasible_point() {
        let (h, j, g) = instance(1);
        let (c, v, y) = (vec![0.0; 2], vec![0.0; 6], vec![0.0; 2]);
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 0.1, 1.0, None);
        let (u, _) = dense_tangential(&h, &j, &ctx.rhs_u());
        assert!(check_model_reduction_condition(0.1, &g, &c, &j, &v, &u, &h, &params()));
    }

    #[test]
    fn model_reduction_rejects_ascent() {
        let h = CsrMatrix::identity(2);
        let j = CsrMatrix::from_dense(1, 2, &[1.0, 0.0]).unwrap();
        let u = [0.0, 1.0];
        assert!(!check_model_reduction_condition(100.0, &u, &[0.0], &j, &[0.0; 2], &u, &h, &params()));
    }

    #[test]
    fn tt1_passes_at_exact_solution_feasible_point() {
        let (h, j, g) = instance(2);
        let (c, v, y) = (vec![0.0; 2], vec![0.0; 6], vec![0.0; 2]);
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 0.1, 1.0, None);
        let (u, delta) = dense_tangential(&h, &j, &ctx.rhs_u());
        assert!(norm2(&u) > 0.0);
        let (rho, r) = residual_pair(&h, &j, &g, &v, &y, &u, &delta).unwrap();
        let cand = Candidate { u: &u, delta: &delta, rho: &rho, r: &r };
        assert!(termination_test_1(&cand, &ctx, &params()));
    }

    #[test]
    fn tt1_fails_on_large_residual() {
        let (h, j, g) = instance(3);
        let (c, v, y) = (vec![0.0; 2], vec![0.0; 6], vec![0.0; 2]);
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 0.1, 1e-3, None);
        let (u, delta) = dense_tangential(&h, &j, &ctx.rhs_u());
        let rho = vec![1.0; 6]; // ‖ρ‖ > κ_ρ β = 0.1
        let r = vec![0.0; 2];
        let report = evaluate_tests(&Candidate { u: &u, delta: &delta, rho: &rho, r: &r }, &ctx, &params(), 0.0);
        assert!(!report.residual_bounds && !report.tt1());
    }

    #[test]
    fn tt1_fails_at_zero_candidate() {
        let (h, j, g) = instance(4);
        let (c, v, y) = (vec![0.0; 2], vec![0.0; 6], vec![0.0; 2]);
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 0.1, 1.0, None);
        let (u, delta) = (vec![0.0; 6], vec![0.0; 2]);
        let (rho, r) = residual_pair(&h, &j, &g, &v, &y, &u, &delta).unwrap();
        let report = evaluate_tests(&Candidate { u: &u, delta: &delta, rho: &rho, r: &r }, &ctx, &params(), 0.0);
        assert!(!report.dual_residual);
        assert!(!report.tt1() && !report.tt2());
    }

    #[test]
    fn tt2_needs_infeasibility() {
        let (h, j, g) = instance(5);
        let (c, v, y) = (vec![0.0; 2], vec![0.0; 6], vec![0.0; 2]);
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 0.1, 1.0, None);
        let (u, delta) = dense_tangential(&h, &j, &ctx.rhs_u());
        let (rho, r) = residual_pair(&h, &j, &g, &v, &y, &u, &delta).unwrap();
        assert!(!termination_test_2(&Candidate { u: &u, delta: &delta, rho: &rho, r: &r }, &ctx, &params()));
    }

    #[test]
    fn tt2_retention_with_zero_r() {
        let (h, j, g) = instance(6);
        let c = vec![0.5, -1.0];
        let cfg = super::super::SolverConfig::general();
        let v = super::super::compute_normal_step(&c, &j, &cfg).unwrap().v;
        let y = vec![0.0; 2];
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 0.1, 1.0, None);
        let u = vec![0.0; 6];
        let delta = vec![0.0; 2];
        let (rho, r) = residual_pair(&h, &j, &g, &v, &y, &u, &delta).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));
        let report = evaluate_tests(&Candidate { u: &u, delta: &delta, rho: &rho, r: &r }, &ctx, &params(), 0.0);
        assert!(report.feasibility_retention);
    }

    #[test]
    fn tt2_passes_for_accurate_inexact_solves() {
        use crate::linalg::{KktOperator, MinresOptions, MinresState};
        let (h, j, g) = instance(7);
        let c = vec![0.8, -0.3];
        let cfg = super::super::SolverConfig::general();
        let v = super::super::compute_normal_step(&c, &j, &cfg).unwrap().v;
        let y = vec![0.0; 2];
        // tiny τ keeps the model reduction condition of TT1 out of reach
        let ctx = TestContext::new(&g, &c, &j, &h, &v, &y, 1e-12, 1.0, None);
        let op = KktOperator::new(&h, &j).unwrap();
        let mut st = MinresState::for_kkt(&op, &ctx.rhs_u(), &[0.0; 2], MinresOptions::default()).unwrap();
        let mut passed_at = None;
        for _ in 0..40 {
            let cand = Candidate { u: st.u(), delta: st.delta(), rho: st.rho(), r: st.r() };
            if termination_test_2(&cand, &ctx, &params()) {
                passed_at = Some(st.iteration());
                break;
            }
            if !st.step() {
                break;
            }
        }
        let k = passed_at.expect("TT2 should hold once the residual is small");
        // and it keeps holding at the exact solution
        let (u, delta) = dense_tangential(&h, &j, &ctx.rhs_u());
        let (rho, r) = residual_pair(&h, &j, &g, &v, &y, &u, &delta).unwrap();
        assert!(termination_test_2(&Candidate { u: &u, delta: &delta, rho: &rho, r: &r }, &ctx, &params()));
        assert!(k <= 8);
    }
}
