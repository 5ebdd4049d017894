use super::{CsrMatrix, LinalgError, Result};

/// A square linear operator acting on flat vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = A x`
    fn apply_into(&self, x: &[f64], out: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        CsrMatrix::apply_into(self, x, out)
    }
}

/// The symmetric indefinite block operator `[H Jᵀ; J 0]`.
///
/// Vectors are stacked as `(u, δ)` with `u` of length `n` and `δ` of length
/// `m`. The block is never assembled.
#[derive(Debug, Clone)]
pub struct KktOperator<'a> {
    h: &'a CsrMatrix,
    j: &'a CsrMatrix,
}

impl<'a> KktOperator<'a> {
    pub fn new(h: &'a CsrMatrix, j: &'a CsrMatrix) -> Result<Self> {
        if h.rows() != h.cols() {
            return Err(LinalgError::Dimension(format!("H is {}x{}, not square", h.rows(), h.cols())));
        }
        if j.cols() != h.rows() {
            return Err(LinalgError::Dimension(format!(
                "J has {} columns but H is {}x{}",
                j.cols(),
                h.rows(),
                h.rows()
            )));
        }
        Ok(Self { h, j })
    }

    pub fn h(&self) -> &CsrMatrix {
        self.h
    }

    pub fn j(&self) -> &CsrMatrix {
        self.j
    }

    pub fn n(&self) -> usize {
        self.h.rows()
    }

    pub fn m(&self) -> usize {
        self.j.rows()
    }

    /// Returns `(H u + Jᵀ δ, J u)`.
    pub fn apply_split(&self, u: &[f64], delta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut top = self.h.apply(u);
        self.j.apply_transpose_add(delta, &mut top);
        (top, self.j.apply(u))
    }
}

impl LinearOperator for KktOperator<'_> {
    fn dim(&self) -> usize {
        self.n() + self.m()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let (u, delta) = x.split_at(n);
        let (top, bottom) = out.split_at_mut(n);
        self.h.apply_into(u, top);
        self.j.apply_transpose_add(delta, top);
        self.j.apply_into(u, bottom);
    }
}

/// Residual pair of the tangential saddle-point system:
/// `ρ = H u + Jᵀ δ + g + H v + Jᵀ y` and `r = J u`.
#[allow(clippy::too_many_arguments)]
pub fn residual_pair(
    h: &CsrMatrix,
    j: &CsrMatrix,
    g: &[f64],
    v: &[f64],
    y: &[f64],
    u: &[f64],
    delta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.rows();
    let m = j.rows();
    if h.cols() != n || j.cols() != n || g.len() != n || v.len() != n || u.len() != n {
        return Err(LinalgError::Dimension("residual_pair: primal lengths disagree".into()));
    }
    if y.len() != m || delta.len() != m {
        return Err(LinalgError::Dimension("residual_pair: dual lengths disagree".into()));
    }
    let u_plus_v: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let mut rho = h.apply(&u_plus_v);
    let y_plus_delta: Vec<f64> = y.iter().zip(delta).map(|(a, b)| a + b).collect();
    j.apply_transpose_add(&y_plus_delta, &mut rho);
    for (p, gi) in rho.iter_mut().zip(g) {
        *p += gi;
    }
    Ok((rho, j.apply(u)))
}
