//! Discretized dual functionals, their closed-form minima, and the dual
//! value.

mod dual;
mod functional;
mod mesh;
mod psi1;
mod psi2;
mod psi3;

pub use dual::dual_value;
pub use functional::{minimize, DiscreteFunctional, QuadraticForm, VariationalResult};
pub use mesh::Mesh;
pub use psi1::{
    check_kernel_relation, kernel_relation_sides, psi1_closed_min_value, psi1_discretize, recover_kernels, Kernels,
    SignalSegment,
};
pub use psi2::{psi2_closed, psi2_discretize, psi2_sweep_integral, Psi2Closed};
pub use psi3::{psi3_eval, Psi3Grid};
