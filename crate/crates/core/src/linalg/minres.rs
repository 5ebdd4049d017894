//! Streaming MINRES (Lanczos tridiagonalization + Givens QR) for symmetric,
//! possibly indefinite systems.
//!
//! The state keeps the residual *vector* `K x + rhs`, not only its norm, so
//! callers can run acceptance tests on every iterate. The vector is advanced
//! by the recurrence `res += φ K w` (the `K w` directions are carried along
//! at no extra operator cost) and recomputed from scratch every
//! `refresh_interval` steps to bound drift.

use super::{axpy, dot, norm2, KktOperator, LinalgError, LinearOperator, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinresOptions {
    /// Lanczos breakdown threshold on the `β` recurrence scalar.
    pub breakdown_tol: f64,
    /// Recompute the true residual every this many steps (0 disables).
    pub refresh_interval: usize,
}

impl Default for MinresOptions {
    fn default() -> Self {
        Self { breakdown_tol: 1e-14, refresh_interval: 25 }
    }
}

/// One MINRES solve of `K z = -rhs`, advanced one iteration at a time.
///
/// The iterate is split as `z = (u, δ)` at `split`; the residual
/// `K z + rhs` is split the same way into `(ρ, r)`.
pub struct MinresState<'a> {
    op: &'a dyn LinearOperator,
    split: usize,
    opts: MinresOptions,
    rhs: Vec<f64>,
    iteration: usize,
    x: Vec<f64>,
    res: Vec<f64>,
    // Lanczos
    v: Vec<f64>,
    v_prev: Vec<f64>,
    beta: f64,
    // QR of the tridiagonal
    cs: f64,
    sn: f64,
    dbar: f64,
    epsln: f64,
    phibar: f64,
    // search directions and their images under K
    w: Vec<f64>,
    w_prev: Vec<f64>,
    kw: Vec<f64>,
    kw_prev: Vec<f64>,
    broken_down: bool,
}

impl<'a> MinresState<'a> {
    /// State at `t = 0`: `z = 0`, residual equal to `rhs`.
    pub fn new(op: &'a dyn LinearOperator, rhs: &[f64], split: usize, opts: MinresOptions) -> Result<Self> {
        let dim = op.dim();
        if rhs.len() != dim {
            return Err(LinalgError::Dimension(format!("rhs has length {}, operator is {dim}", rhs.len())));
        }
        if split > dim {
            return Err(LinalgError::Dimension(format!("split {split} exceeds dimension {dim}")));
        }
        let beta1 = norm2(rhs);
        let broken_down = beta1 < opts.breakdown_tol;
        let v = if broken_down { vec![0.0; dim] } else { rhs.iter().map(|b| -b / beta1).collect() };
        Ok(Self {
            op,
            split,
            opts,
            rhs: rhs.to_vec(),
            iteration: 0,
            x: vec![0.0; dim],
            res: rhs.to_vec(),
            v,
            v_prev: vec![0.0; dim],
            beta: beta1,
            cs: -1.0,
            sn: 0.0,
            dbar: 0.0,
            epsln: 0.0,
            phibar: beta1,
            w: vec![0.0; dim],
            w_prev: vec![0.0; dim],
            kw: vec![0.0; dim],
            kw_prev: vec![0.0; dim],
            broken_down,
        })
    }

    /// Initializes a solve of `[H Jᵀ; J 0] (u, δ) = -(rhs_u, rhs_delta)`.
    pub fn for_kkt(op: &'a KktOperator<'_>, rhs_u: &[f64], rhs_delta: &[f64], opts: MinresOptions) -> Result<Self> {
        if rhs_u.len() != op.n() || rhs_delta.len() != op.m() {
            return Err(LinalgError::Dimension(format!(
                "rhs blocks ({}, {}) do not match KKT blocks ({}, {})",
                rhs_u.len(),
                rhs_delta.len(),
                op.n(),
                op.m()
            )));
        }
        let mut rhs = rhs_u.to_vec();
        rhs.extend_from_slice(rhs_delta);
        Self::new(op, &rhs, op.n(), opts)
    }

    /// Advances one iteration. Returns `false` (and leaves the state
    /// untouched) once the Lanczos process has broken down.
    pub fn step(&mut self) -> bool {
        if self.broken_down {
            return false;
        }
        let dim = self.x.len();
        let mut kv = vec![0.0; dim];
        self.op.apply_into(&self.v, &mut kv);
        let alpha = dot(&self.v, &kv);
        let mut p = kv.clone();
        axpy(-alpha, &self.v, &mut p);
        axpy(-self.beta, &self.v_prev, &mut p);
        let beta_next = norm2(&p);

        let oldeps = self.epsln;
        let delta = self.cs * self.dbar + self.sn * alpha;
        let gbar = self.sn * self.dbar - self.cs * alpha;
        self.epsln = self.sn * beta_next;
        self.dbar = -self.cs * beta_next;
        let gamma = gbar.hypot(beta_next);
        if gamma == 0.0 || !gamma.is_finite() {
            self.broken_down = true;
            return false;
        }
        self.cs = gbar / gamma;
        self.sn = beta_next / gamma;
        let phi = self.cs * self.phibar;
        self.phibar *= self.sn;

        let mut w_new = self.v.clone();
        axpy(-oldeps, &self.w_prev, &mut w_new);
        axpy(-delta, &self.w, &mut w_new);
        w_new.iter_mut().for_each(|x| *x /= gamma);
        let mut kw_new = kv;
        axpy(-oldeps, &self.kw_prev, &mut kw_new);
        axpy(-delta, &self.kw, &mut kw_new);
        kw_new.iter_mut().for_each(|x| *x /= gamma);

        self.w_prev = std::mem::replace(&mut self.w, w_new);
        self.kw_prev = std::mem::replace(&mut self.kw, kw_new);
        axpy(phi, &self.w, &mut self.x);
        axpy(phi, &self.kw, &mut self.res);

        self.iteration += 1;
        if self.opts.refresh_interval > 0 && self.iteration.is_multiple_of(self.opts.refresh_interval) {
            self.refresh_residual();
        }

        if beta_next < self.opts.breakdown_tol {
            self.broken_down = true;
        } else {
            p.iter_mut().for_each(|x| *x /= beta_next);
            self.v_prev = std::mem::replace(&mut self.v, p);
            self.beta = beta_next;
        }
        true
    }

    /// Replaces the recurrence residual by `K z + rhs`.
    pub fn refresh_residual(&mut self) {
        self.op.apply_into(&self.x, &mut self.res);
        axpy(1.0, &self.rhs, &mut self.res);
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_broken_down(&self) -> bool {
        self.broken_down
    }

    pub fn solution(&self) -> &[f64] {
        &self.x
    }

    pub fn residual(&self) -> &[f64] {
        &self.res
    }

    pub fn u(&self) -> &[f64] {
        &self.x[..self.split]
    }

    pub fn delta(&self) -> &[f64] {
        &self.x[self.split..]
    }

    pub fn rho(&self) -> &[f64] {
        &self.res[..self.split]
    }

    pub fn r(&self) -> &[f64] {
        &self.res[self.split..]
    }

    pub fn residual_norm(&self) -> f64 {
        norm2(&self.res)
    }

    /// Residual norm predicted by the QR recurrence.
    pub fn estimated_residual_norm(&self) -> f64 {
        self.phibar
    }
}

/// Runs MINRES until `‖K z + rhs‖ <= rel_tol ‖rhs‖`, breakdown, or `max_iter`.
pub fn minres_solve<'a>(
    op: &'a dyn LinearOperator,
    rhs: &[f64],
    split: usize,
    rel_tol: f64,
    max_iter: usize,
    opts: MinresOptions,
) -> Result<MinresState<'a>> {
    let mut state = MinresState::new(op, rhs, split, opts)?;
    let target = rel_tol * norm2(rhs);
    while state.residual_norm() > target {
        if state.iteration() >= max_iter || !state.step() {
            break;
        }
    }
    if state.residual_norm() > target {
        state.refresh_residual();
    }
    if state.residual_norm() <= target {
        Ok(state)
    } else {
        Err(LinalgError::NotConverged {
            method: "MINRES",
            iterations: state.iteration(),
            residual: state.residual_norm(),
            best: state.solution().to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    #[test]
    fn zero_rhs_is_converged_at_start() {
        let h = CsrMatrix::identity(3);
        let j = CsrMatrix::from_dense(1, 3, &[1.0, 0.0, 0.0]).unwrap();
        let op = KktOperator::new(&h, &j).unwrap();
        let mut s = MinresState::for_kkt(&op, &[0.0; 3], &[0.0], MinresOptions::default()).unwrap();
        assert_eq!(s.residual_norm(), 0.0);
        assert!(s.is_broken_down());
        assert!(!s.step());
        assert_eq!(s.iteration(), 0);
    }

    #[test]
    fn initial_residual_equals_rhs() {
        let h = CsrMatrix::identity(3);
        let j = CsrMatrix::from_dense(1, 3, &[1.0, 0.0, 0.0]).unwrap();
        let op = KktOperator::new(&h, &j).unwrap();
        let s = MinresState::for_kkt(&op, &[1.0, 0.0, 0.0], &[0.0], MinresOptions::default()).unwrap();
        assert_eq!(s.rho(), &[1.0, 0.0, 0.0]);
        assert_eq!(s.r(), &[0.0]);
        assert_eq!(s.residual_norm(), 1.0);
        assert!(s.u().iter().chain(s.delta()).all(|x| *x == 0.0));
    }

    #[test]
    fn identity_block_without_constraints() {
        let h = CsrMatrix::identity(2);
        let j = CsrMatrix::zeros(0, 2);
        let op = KktOperator::new(&h, &j).unwrap();
        let b = [0.3, -1.7];
        let mut s = MinresState::for_kkt(&op, &b, &[], MinresOptions::default()).unwrap();
        let mut steps = 0;
        while s.step() {
            steps += 1;
        }
        assert!(steps <= 2);
        // H u + b = 0
        assert!((s.u()[0] + 0.3).abs() < 1e-14 && (s.u()[1] - 1.7).abs() < 1e-14);
        assert!(s.residual_norm() < 1e-14);
        let before = s.residual().to_vec();
        assert!(!s.step());
        assert_eq!(s.residual(), &before[..]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let h = CsrMatrix::identity(2);
        let j = CsrMatrix::zeros(1, 2);
        let op = KktOperator::new(&h, &j).unwrap();
        assert!(MinresState::for_kkt(&op, &[1.0], &[0.0], MinresOptions::default()).is_err());
        assert!(MinresState::new(&op, &[1.0; 4], 2, MinresOptions::default()).is_err());
    }

    #[test]
    fn solve_reports_stagnation() {
        // singular operator with rhs outside its range
        let h = CsrMatrix::diagonal(&[1.0, 0.0]);
        let j = CsrMatrix::zeros(0, 2);
        let op = KktOperator::new(&h, &j).unwrap();
        let err = minres_solve(&op, &[1.0, 1.0], 2, 1e-10, 20, MinresOptions::default());
        assert!(matches!(err, Err(LinalgError::NotConverged { .. })));
    }
}
