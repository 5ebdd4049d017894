//! Sparse matrices, the saddle-point operator and the Krylov solvers used by
//! the optimizer.
//!
//! Everything here works on plain `&[f64]` slices. The Krylov methods are
//! matrix-free: they only ever call `apply`/`apply_transpose`.

mod cg;
mod kkt;
mod minres;
mod sparse;

pub use cg::{cg_normal_solve, least_squares_multipliers, CgOutcome};
pub use kkt::{residual_pair, KktOperator, LinearOperator};
pub use minres::{minres_solve, MinresOptions, MinresState};
pub use sparse::CsrMatrix;

use thiserror::Error;

/// Failures raised by the linear algebra layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index ({row}, {col}) out of range for {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The iteration cap was hit. `best` holds the last iterate.
    #[error("{method} did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm of the stacked vector `(a; b)`.
#[inline]
pub fn stacked_norm2(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, a) + dot(b, b)).sqrt()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}
