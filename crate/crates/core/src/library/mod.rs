//! Built-in test problems.
//!
//! * [`SyntheticQp`]: random convex QPs with linear constraints and a known
//!   KKT pair.
//! * [`PoissonControl`] and [`NeumannControl`]: finite-difference
//!   discretizations of two finite-sum optimal control problems on the unit
//!   square.
//! * [`CircleProblem`]: `min x₁ s.t. x₁² + x₂² = 1`, a small nonlinear case.

mod circle;
mod control;
mod neumann;
mod poisson;
mod synthetic;

pub use circle::CircleProblem;
pub use control::{reference_function_value, ControlProblemSpec, ControlVariant};
pub use neumann::NeumannControl;
pub use poisson::PoissonControl;
pub use synthetic::{SyntheticQp, SyntheticQpSpec};

use crate::problem::{Problem, ProblemError};
use std::sync::Arc;

pub fn build_control(spec: &ControlProblemSpec) -> Result<Arc<dyn Problem>, ProblemError> {
    Ok(match spec.variant {
        ControlVariant::PoissonDistributed => Arc::new(PoissonControl::new(spec)?),
        ControlVariant::NeumannBoundary => Arc::new(NeumannControl::new(spec)?),
    })
}
