use crate::linalg::CsrMatrix;

/// Iterative Hessian modification `ι ∇²L + (1 - ι) I` with `ι = 10^(-rung)`.
///
/// Rungs `0..=max_rung` blend toward the identity; any rung past `max_rung`
/// is the identity itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianLadder {
    pub max_rung: usize,
}

impl Default for HessianLadder {
    fn default() -> Self {
        Self { max_rung: 10 }
    }
}

impl HessianLadder {
    pub fn new(max_rung: usize) -> Self {
        Self { max_rung }
    }

    /// Index of the last rung (the identity).
    pub fn final_rung(&self) -> usize {
        self.max_rung + 1
    }

    /// Blending weight `ι`, or `None` for the identity rung.
    pub fn weight(&self, rung: usize) -> Option<f64> {
        (rung <= self.max_rung).then(|| 10f64.powi(-(rung as i32)))
    }

    pub fn matrix(&self, rung: usize, hessian: &CsrMatrix) -> CsrMatrix {
        match self.weight(rung) {
            None => CsrMatrix::identity(hessian.rows()),
            Some(w) if w == 1.0 => hessian.clone(),
            Some(w) => hessian
                .linear_combination(w, &CsrMatrix::identity(hessian.rows()), 1.0 - w)
                .expect("square Hessian"),
        }
    }
}
