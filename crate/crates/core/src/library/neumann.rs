use super::control::{ControlProblemSpec, ControlVariant};
use super::poisson::{target_moments, tracking_gradient, tracking_objective};
use crate::linalg::CsrMatrix;
use crate::problem::{FiniteSum, Problem, ProblemError};

/// Neumann boundary control of `-Δw + w = 0` on `[0,1]²`.
///
/// The state lives on all `(N_h+2)²` grid nodes, boundary included; node
/// `(a, b)` sits at `(a h, b h)` and is stored at `b (N_h+2) + a`. The
/// control lives on the `4 N_h` non-corner boundary nodes, ordered bottom
/// (left to right), right (bottom to top), top (left to right), left (bottom
/// to top).
///
/// `∂w/∂p = z` is imposed with ghost nodes, `w_ghost = w_mirror + 2h z`. A
/// corner takes the mean of the controls at its two neighbouring edge nodes
/// as the flux in both of its outward directions. Rows are scaled by `h²`.
#[derive(Debug, Clone)]
pub struct NeumannControl {
    spec: ControlProblemSpec,
    name: String,
    states: usize,
    controls: usize,
    jac: CsrMatrix,
    hess: CsrMatrix,
    targets: Vec<Vec<f64>>,
    mean_target: Vec<f64>,
    target_energy: f64,
}

impl NeumannControl {
    pub fn new(spec: &ControlProblemSpec) -> Result<Self, ProblemError> {
        spec.validate()?;
        if spec.variant != ControlVariant::NeumannBoundary {
            return Err(ProblemError::InvalidSpec("NeumannControl needs the neumann_boundary variant".into()));
        }
        let nh = spec.grid;
        let side = nh + 2;
        let last = nh + 1;
        let states = side * side;
        let controls = 4 * nh;
        let h = spec.h();
        let node = |a: usize, b: usize| b * side + a;

        // control column for a non-corner boundary node
        let control = |a: usize, b: usize| -> usize {
            let k = if b == 0 {
                a - 1
            } else if a == last {
                nh + b - 1
            } else if b == last {
                2 * nh + a - 1
            } else {
                debug_assert_eq!(a, 0);
                3 * nh + b - 1
            };
            states + k
        };
        // flux weights (column, weight) used by a ghost direction at (a, b)
        let flux = |a: usize, b: usize| -> Vec<(usize, f64)> {
            let a_edge = a == 0 || a == last;
            let b_edge = b == 0 || b == last;
            if a_edge && b_edge {
                let na = if a == 0 { 1 } else { nh };
                let nb = if b == 0 { 1 } else { nh };
                vec![(control(na, b), 0.5), (control(a, nb), 0.5)]
            } else {
                vec![(control(a, b), 1.0)]
            }
        };

        let mut trip = Vec::new();
        for b in 0..side {
            for a in 0..side {
                let row = node(a, b);
                trip.push((row, row, 4.0 + h * h));
                // (neighbour exists?, neighbour, mirror)
                let dirs = [
                    (a > 0, (a.wrapping_sub(1), b), (a + 1, b)),
                    (a < last, (a + 1, b), (a.wrapping_sub(1), b)),
                    (b > 0, (a, b.wrapping_sub(1)), (a, b + 1)),
                    (b < last, (a, b + 1), (a, b.wrapping_sub(1))),
                ];
                for (inside, nb, mirror) in dirs {
                    if inside {
                        trip.push((row, node(nb.0, nb.1), -1.0));
                    } else {
                        trip.push((row, node(mirror.0, mirror.1), -1.0));
                        for (col, wgt) in flux(a, b) {
                            trip.push((row, col, -2.0 * h * wgt));
                        }
                    }
                }
            }
        }
        let jac = CsrMatrix::from_triplets(states, states + controls, &trip)?;
        let mut diag = vec![1.0; states];
        diag.extend(std::iter::repeat_n(spec.lambda, controls));
        let hess = CsrMatrix::diagonal(&diag);

        let nodes: Vec<(f64, f64)> =
            (0..states).map(|k| ((k % side) as f64 * h, (k / side) as f64 * h)).collect();
        let targets = spec.targets(&nodes);
        let (mean_target, target_energy) = target_moments(&targets, states);
        Ok(Self {
            name: format!("neumann_control_nh{nh}"),
            spec: spec.clone(),
            states,
            controls,
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

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_controls(&self) -> usize {
        self.controls
    }
}

impl Problem for NeumannControl {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_variables(&self) -> usize {
        self.states + self.controls
    }

    fn num_constraints(&self) -> usize {
        self.states
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![1.0; self.states + self.controls]
    }

    fn objective(&self, x: &[f64]) -> f64 {
        tracking_objective(x, self.states, self.spec.lambda, &self.mean_target, self.target_energy)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        tracking_gradient(x, self.states, self.spec.lambda, &self.mean_target)
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
            ("neumann".into(), "ghost-node elimination, corner flux = mean of adjacent edge controls".into()),
            ("objective_norm".into(), "euclidean over grid values".into()),
        ]
    }
}

impl FiniteSum for NeumannControl {
    fn terms_per_axis(&self) -> usize {
        self.spec.terms
    }

    fn term_gradient(&self, i: usize, j: usize, x: &[f64]) -> Vec<f64> {
        let n = self.spec.terms;
        tracking_gradient(x, self.states, self.spec.lambda, &self.targets[(i - 1) * n + (j - 1)])
    }
}
