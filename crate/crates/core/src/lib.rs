//! Numerical laboratory for optimal investment with a noisy look-ahead
//! signal on one of the two Brownian drivers of a Bachelier stock, under
//! linear temporary price impact and exponential utility.
//!
//! The crate is organised around four layers:
//!
//! * [`model`]: parameter validation, the peek-ahead time shift `tau` with
//!   its generalized inverse, and the reduction of any parameter set to the
//!   baseline model (`s0 = 0`, `mu = 0`, `sigma = 1`, `alpha = 1`).
//! * [`closed_form`]: the analytic value, the kernel `Upsilon`, the
//!   certainty equivalent and the Merton ratio.
//! * [`sim`]: exact scenario generation, admissible strategies that only see
//!   the information available to the investor, the optimal strategy, and
//!   Monte Carlo estimation of expected exponential utility.
//! * [`variational`]: finite element discretizations of the dual quadratic
//!   functionals, their minimization, and comparison with the closed forms.

pub mod closed_form;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod sim;
pub mod variational;

pub use error::{Error, Result};
pub use model::{BaselineReduction, ModelParams, TimeShift, ValidatedModel};
