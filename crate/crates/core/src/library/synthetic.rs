use crate::linalg::{dot, CsrMatrix};
use crate::problem::{KktPair, Problem, ProblemError};
use crate::rng::{stream_rng, RunRng, Stream};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticQpSpec {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Ratio of the largest to smallest eigenvalue of `Q`.
    pub condition: f64,
    /// Smallest eigenvalue of `Q`, hence a lower bound on the reduced Hessian.
    pub curvature_floor: f64,
}

impl SyntheticQpSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self { n, m, seed, condition: 10.0, curvature_floor: 1.0 }
    }
}

/// `min ½xᵀQx + qᵀx  s.t.  Jx - b = 0`.
///
/// `J = U [S 0] Vᵀ` with singular values in `[1, 2]`, `Q = W diag(λ) Wᵀ`
/// with `λ` log-spaced over `[floor, floor·condition]`. A KKT pair
/// `(x*, y*)` is drawn first and `q`, `b` are set from it.
#[derive(Debug, Clone)]
pub struct SyntheticQp {
    spec: SyntheticQpSpec,
    name: String,
    q_mat: CsrMatrix,
    q_lin: Vec<f64>,
    jac: CsrMatrix,
    b: Vec<f64>,
    solution: KktPair,
}

const MAX_ATTEMPTS: usize = 10;

/// Modified Gram-Schmidt on a Gaussian matrix; `None` if a column collapses.
fn random_orthogonal(dim: usize, rng: &mut RunRng) -> Option<Vec<Vec<f64>>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for q in &cols {
            let p = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
        }
        let nv = dot(&v, &v).sqrt();
        if nv < 1e-8 {
            return None;
        }
        v.iter_mut().for_each(|a| *a /= nv);
        cols.push(v);
    }
    Some(cols)
}

impl SyntheticQp {
    pub fn new(spec: &SyntheticQpSpec) -> Result<Self, ProblemError> {
        let SyntheticQpSpec { n, m, .. } = *spec;
        if n == 0 || m > n {
            return Err(ProblemError::InvalidSpec(format!("need 0 < m <= n, got n={n}, m={m}")));
        }
        if !(spec.condition >= 1.0) || !(spec.curvature_floor > 0.0) {
            return Err(ProblemError::InvalidSpec("condition must be >= 1 and curvature floor > 0".into()));
        }
        let mut rng = stream_rng(spec.seed, Stream::ProblemGeneration);
        for _ in 0..MAX_ATTEMPTS {
            if let Some(p) = Self::generate(spec, &mut rng) {
                return Ok(p);
            }
        }
        Err(ProblemError::InvalidSpec(format!("could not generate a full-rank instance in {MAX_ATTEMPTS} attempts")))
    }

    fn generate(spec: &SyntheticQpSpec, rng: &mut RunRng) -> Option<Self> {
        let (n, m) = (spec.n, spec.m);
        let u = random_orthogonal(m, rng)?;
        let v = random_orthogonal(n, rng)?;
        let w = random_orthogonal(n, rng)?;
        let sing: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..2.0)).collect();

        let mut j_dense = vec![0.0; m * n];
        for r in 0..m {
            for c in 0..n {
                j_dense[r * n + c] = (0..m).map(|k| u[k][r] * sing[k] * v[k][c]).sum();
            }
        }
        let eig: Vec<f64> = (0..n)
            .map(|i| {
                let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                spec.curvature_floor * spec.condition.powf(t)
            })
            .collect();
        let mut q_dense = vec![0.0; n * n];
        for r in 0..n {
            for c in r..n {
                let val: f64 = (0..n).map(|k| w[k][r] * eig[k] * w[k][c]).sum();
                q_dense[r * n + c] = val;
                q_dense[c * n + r] = val;
            }
        }
        let jac = CsrMatrix::from_dense(m, n, &j_dense).ok()?;
        let q_mat = CsrMatrix::from_dense(n, n, &q_dense).ok()?;

        let x_star: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y_star: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut q_lin = q_mat.apply(&x_star);
        jac.apply_transpose_add(&y_star, &mut q_lin);
        q_lin.iter_mut().for_each(|a| *a = -*a);
        let b = jac.apply(&x_star);
        Some(Self {
            name: format!("synthetic_qp_n{n}_m{m}_s{}", spec.seed),
            spec: spec.clone(),
            q_mat,
            q_lin,
            jac,
            b,
            solution: KktPair { x: x_star, y: y_star },
        })
    }

    pub fn spec(&self) -> &SyntheticQpSpec {
        &self.spec
    }

    pub fn hessian(&self) -> &CsrMatrix {
        &self.q_mat
    }
}

impl Problem for SyntheticQp {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_variables(&self) -> usize {
        self.spec.n
    }

    fn num_constraints(&self) -> usize {
        self.spec.m
    }

    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.spec.n]
    }

    fn objective(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q_mat.apply(x)) + dot(&self.q_lin, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.q_mat.apply(x);
        g.iter_mut().zip(&self.q_lin).for_each(|(a, b)| *a += b);
        g
    }

    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let mut c = self.jac.apply(x);
        c.iter_mut().zip(&self.b).for_each(|(a, b)| *a -= b);
        c
    }

    fn jacobian(&self, _x: &[f64]) -> CsrMatrix {
        self.jac.clone()
    }

    fn lagrangian_hessian(&self, _x: &[f64], _y: &[f64]) -> CsrMatrix {
        self.q_mat.clone()
    }

    fn known_solution(&self) -> Option<KktPair> {
        Some(self.solution.clone())
    }

    fn notes(&self) -> Vec<(String, String)> {
        vec![
            ("condition".into(), self.spec.condition.to_string()),
            ("curvature_floor".into(), self.spec.curvature_floor.to_string()),
        ]
    }
}
