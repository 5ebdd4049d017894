#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sisqo::linalg::CsrMatrix;

pub fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.rows(), a.cols());
    for (r, c, v) in a.iter() {
        m[(r, c)] += v;
    }
    m
}

/// `[H Jᵀ; J 0]`
pub fn dense_kkt(h: &CsrMatrix, j: &CsrMatrix) -> DMatrix<f64> {
    let (n, m) = (h.rows(), j.rows());
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&dense(h));
    let jd = dense(j);
    k.view_mut((n, 0), (m, n)).copy_from(&jd);
    k.view_mut((0, n), (n, m)).copy_from(&jd.transpose());
    k
}

/// Solves `K z = b` by LU, returning the solution as a `Vec`.
pub fn dense_solve(k: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let z = k.clone().lu().solve(&DVector::from_column_slice(b)).expect("nonsingular");
    z.iter().copied().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
