//! Taylor-Hood P2/P1 spaces, operator assembly and the nonlinear forms.

mod assembly;
pub mod element;
mod forms;
mod space;
mod system;


pub(crate) use assembly::element_nonlinear;
pub use assembly::{
    assemble_linear_operators, div_curl_sq, eval_at, field_norms, gather, integrate_field, nonlinear_residual,
    nonlinear_residual_and_jacobian, trilinear_value, FieldNorms, LinearOperators,
};
pub use forms::NonlinearForm;
pub use space::{BoundaryCondition, BoundaryMap, Profile, TaylorHoodSpace};
pub use system::{apply_constraints, constraint_list, eliminate, project_divergence_free, SaddlePattern};

use rand::Rng;

/// Uniform(-1, 1) coefficients with zero essential values.
pub fn random_field(space: &TaylorHoodSpace, rng: &mut impl Rng) -> Vec<f64> {
    (0..space.n_velocity()).map(|d| if space.is_constrained(d) { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect()
}
