use super::control::{ControlProblemSpec, ControlVariant};
use crate::linalg::{dot, CsrMatrix};
use crate::problem::{FiniteSum, Problem, ProblemError};

/// Distributed control of the Dirichlet Poisson equation on `(0,1)²`.
///
/// Variables are `x = (w, z)` on the `N_h × N_h` interior grid, node
/// `(a, b)` at `((a+1)h, (b+1)h)` stored at `b N_h + a`. The constraint is
/// the 5-point Laplacian multiplied through by `h²`:
/// `c(w, z) = A w - h² z` with `A = tridiag-stencil(4, -1)`.
///
/// The objective is `(1/N²) Σ_ij ½‖w - w̄_ij‖² + (λ/2)‖z‖²` with grid
/// vectors, so the Lagrangian Hessian is exactly `diag(I, λI)`.
#[derive(Debug, Clone)]
pub struct PoissonControl {
    spec: ControlProblemSpec,
    name: String,
    cells: usize,
    jac: CsrMatrix,
    hess: CsrMatrix,
    targets: Vec<Vec<f64>>,
    mean_target: Vec<f64>,
    /// `(1/N²) Σ ½‖w̄_ij‖²`
    target_energy: f64,
}

impl PoissonControl {
    pub fn new(spec: &ControlProblemSpec) -> Result<Self, ProblemError> {
        spec.validate()?;
        if spec.variant != ControlVariant::PoissonDistributed {
            return Err(ProblemError::InvalidSpec("PoissonControl needs the poisson_distributed variant".into()));
        }
        let nh = spec.grid;
        let cells = nh * nh;
        let h = spec.h();
        let idx = |a: usize, b: usize| b * nh + a;

        let mut trip = Vec::with_capacity(6 * cells);
        for b in 0..nh {
            for a in 0..nh {
                let row = idx(a, b);
                trip.push((row, row, 4.0));
                if a > 0 {
                    trip.push((row, idx(a - 1, b), -1.0));
                }
                if a + 1 < nh {
                    trip.push((row, idx(a + 1, b), -1.0));
                }
                if b > 0 {
                    trip.push((row, idx(a, b - 1), -1.0));
                }
                if b + 1 < nh {
                    trip.push((row, idx(a, b + 1), -1.0));
                }
                trip.push((row, cells + row, -h * h));
            }
        }
        let jac = CsrMatrix::from_triplets(cells, 2 * cells, &trip)?;
        let mut diag = vec![1.0; cells];
        diag.extend(std::iter::repeat_n(spec.lambda, cells));
        let hess = CsrMatrix::diagonal(&diag);

        let nodes: Vec<(f64, f64)> =
            (0..cells).map(|k| (((k % nh) as f64 + 1.0) * h, ((k / nh) as f64 + 1.0) * h)).collect();
        let targets = spec.targets(&nodes);
        let (mean_target, target_energy) = target_moments(&targets, cells);
        Ok(Self {
            name: format!("poisson_control_nh{nh}"),
            spec: spec.clone(),
            cells,
            jac,
            hess,
            targets,
            mean_target,
            target_energy,
        })
    }

    pub fn spec(&self) -> &ControlProblemSpec {
        &self.spec
    }

    /// The Dirichlet Laplacian block `A` (scaled by `h²`).
    pub fn laplacian(&self) -> CsrMatrix {
        let trip: Vec<_> = self.jac.iter().filter(|&(_, c, _)| c < self.cells).collect();
        CsrMatrix::from_triplets(self.cells, self.cells, &trip).expect("block of a valid matrix")
    }
}

pub(crate) fn target_moments(targets: &[Vec<f64>], len: usize) -> (Vec<f64>, f64) {
    let w = 1.0 / targets.len() as f64;
    let mut mean = vec![0.0; len];
    let mut energy = 0.0;
    for t in targets {
        for (m, v) in mean.iter_mut().zip(t) {
            *m += w * v;
        }
        energy += 0.5 * w * dot(t, t);
    }
    (mean, energy)
}

/// Shared objective for the control problems: state block of length
/// `states`, control block after it.
pub(crate) fn tracking_objective(x: &[f64], states: usize, lambda: f64, mean: &[f64], energy: f64) -> f64 {
    let (w, z) = x.split_at(states);
    0.5 * dot(w, w) - dot(w, mean) + energy + 0.5 * lambda * dot(z, z)
}

pub(crate) fn tracking_gradient(x: &[f64], states: usize, lambda: f64, target: &[f64]) -> Vec<f64> {
    let (w, z) = x.split_at(states);
    w.iter().zip(target).map(|(a, b)| a - b).chain(z.iter().map(|v| lambda * v)).collect()
}

impl Problem for PoissonControl {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_variables(&self) -> usize {
        2 * self.cells
    }

    fn num_constraints(&self) -> usize {
        self.cells
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![1.0; 2 * self.cells]
    }

    fn objective(&self, x: &[f64]) -> f64 {
        tracking_objective(x, self.cells, self.spec.lambda, &self.mean_target, self.target_energy)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        tracking_gradient(x, self.cells, self.spec.lambda, &self.mean_target)
    }

    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        self.jac.apply(x)
    }

    fn jacobian(&self, _x: &[f64]) -> CsrMatrix {
        self.jac.clone()
    }

    fn lagrangian_hessian(&self, _x: &[f64], _y: &[f64]) -> CsrMatrix {
        self.hess.clone()
    }

    fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        Some(self)
    }

    fn notes(&self) -> Vec<(String, String)> {
        vec![
            ("grid".into(), self.spec.grid.to_string()),
            ("h".into(), format!("{:e}", self.spec.h())),
            ("constraint_scaling".into(), "rows multiplied by h^2".into()),
            ("objective_norm".into(), "euclidean over grid values".into()),
        ]
    }
}

impl FiniteSum for PoissonControl {
    fn terms_per_axis(&self) -> usize {
        self.spec.terms
    }

    fn term_gradient(&self, i: usize, j: usize, x: &[f64]) -> Vec<f64> {
        let n = self.spec.terms;
        tracking_gradient(x, self.cells, self.spec.lambda, &self.targets[(i - 1) * n + (j - 1)])
    }
}
