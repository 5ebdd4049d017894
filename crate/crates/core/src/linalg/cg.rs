use super::{axpy, dot, norm2, CsrMatrix, LinalgError, Result};

/// Result of a conjugate gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Norm of the final (recurrence) residual.
    pub residual: f64,
}

/// Plain CG on `A x = b` from `x = 0`, stopping at the first iterate with
/// `‖A x - b‖ <= threshold`.
fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    threshold: f64,
    max_iter: usize,
    method: &'static str,
) -> Result<CgOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= threshold {
        return Ok(CgOutcome { solution: x, iterations: 0, residual: rr.sqrt() });
    }
    let mut p = r.clone();
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            // Curvature vanished: the operator is singular along p.
            return Err(LinalgError::NotConverged { method, iterations: it - 1, residual: rr.sqrt(), best: x });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= threshold {
            return Ok(CgOutcome { solution: x, iterations: it, residual: rr_next.sqrt() });
        }
        let beta = rr_next / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_next;
    }
    Err(LinalgError::NotConverged { method, iterations: max_iter, residual: rr.sqrt(), best: x })
}

/// Solves `JᵀJ v = -Jᵀc` by CG from `v = 0`, matrix-free.
///
/// Stops at the first iterate with `‖JᵀJ v + Jᵀc‖ <= max(rel_tol ‖Jᵀc‖, abs_floor)`.
/// Every iterate lies in `Range(Jᵀ)`.
pub fn cg_normal_solve(
    j: &CsrMatrix,
    c: &[f64],
    rel_tol: f64,
    abs_floor: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    if j.rows() == 0 || j.cols() == 0 {
        return Err(LinalgError::Dimension("normal solve needs a nonempty Jacobian".into()));
    }
    if c.len() != j.rows() {
        return Err(LinalgError::Dimension(format!("c has length {}, J has {} rows", c.len(), j.rows())));
    }
    if !(rel_tol > 0.0 && rel_tol <= 1.0) || abs_floor <= 0.0 {
        return Err(LinalgError::InvalidParameter(format!(
            "need rel_tol in (0,1] and abs_floor > 0, got {rel_tol}, {abs_floor}"
        )));
    }
    let mut b = j.apply_transpose(c);
    let b_norm = norm2(&b);
    if b_norm == 0.0 {
        return Ok(CgOutcome { solution: vec![0.0; j.cols()], iterations: 0, residual: 0.0 });
    }
    b.iter_mut().for_each(|x| *x = -*x);
    let threshold = (rel_tol * b_norm).max(abs_floor);
    conjugate_gradient(|p| j.apply_transpose(&j.apply(p)), &b, threshold, max_iter, "normal-equations CG")
}

/// Least-squares multipliers: the `y` minimizing `‖g + Jᵀy‖`, obtained from
/// `J Jᵀ y = -J g` by CG to relative tolerance `tol`.
pub fn least_squares_multipliers(j: &CsrMatrix, g: &[f64], tol: f64) -> Result<CgOutcome> {
    if g.len() != j.cols() {
        return Err(LinalgError::Dimension(format!("g has length {}, J has {} columns", g.len(), j.cols())));
    }
    if j.rows() == 0 {
        return Ok(CgOutcome { solution: Vec::new(), iterations: 0, residual: 0.0 });
    }
    let mut b = j.apply(g);
    let b_norm = norm2(&b);
    if b_norm == 0.0 {
        return Ok(CgOutcome { solution: vec![0.0; j.rows()], iterations: 0, residual: 0.0 });
    }
    b.iter_mut().for_each(|x| *x = -*x);
    let threshold = tol * b_norm;
    let max_iter = 10 * j.rows() + 50;
    conjugate_gradient(|p| j.apply(&j.apply_transpose(p)), &b, threshold, max_iter, "least-squares CG")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_jacobian_gives_newton_step() {
        let j = CsrMatrix::identity(2);
        let out = cg_normal_solve(&j, &[1.0, 1.0], 0.1, 1e-10, 10).unwrap();
        assert_eq!(out.solution, vec![-1.0, -1.0]);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn zero_constraint_returns_zero_immediately() {
        let j = CsrMatrix::from_dense(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let out = cg_normal_solve(&j, &[0.0, 0.0], 0.1, 1e-10, 10).unwrap();
        assert_eq!(out.solution, vec![0.0; 3]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn bad_parameters_rejected() {
        let j = CsrMatrix::identity(2);
        assert!(cg_normal_solve(&j, &[1.0, 1.0], 0.0, 1e-10, 10).is_err());
        assert!(cg_normal_solve(&j, &[1.0, 1.0], 0.5, 0.0, 10).is_err());
        assert!(cg_normal_solve(&j, &[1.0], 0.5, 1e-10, 10).is_err());
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let j = CsrMatrix::from_dense(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        let err = cg_normal_solve(&j, &[1.0, -2.0, 3.0], 1e-14, 1e-300, 1).unwrap_err();
        match err {
            LinalgError::NotConverged { iterations, best, .. } => {
                assert_eq!(iterations, 1);
                assert_eq!(best.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multipliers_vanish_for_null_space_gradient() {
        let j = CsrMatrix::from_dense(1, 3, &[1.0, 0.0, 0.0]).unwrap();
        let out = least_squares_multipliers(&j, &[0.0, 2.0, -1.0], 1e-12).unwrap();
        assert_eq!(out.solution, vec![0.0]);
    }

    #[test]
    fn multipliers_recover_constructed_value() {
        let j = CsrMatrix::from_dense(2, 4, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 1.0, 1.0]).unwrap();
        let y_hat = [0.7, -1.3];
        let g: Vec<f64> = j.apply_transpose(&y_hat).iter().map(|v| -v).collect();
        let y = least_squares_multipliers(&j, &g, 1e-14).unwrap().solution;
        for (a, b) in y.iter().zip(&y_hat) {
            assert!((a - b).abs() <= 1e-8);
        }
        let mut res = g.clone();
        j.apply_transpose_add(&y, &mut res);
        assert!(norm2(&res) <= 1e-8);
    }
}
