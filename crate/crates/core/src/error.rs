use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("{what} = {value} outside of [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("quadrature did not reach relative tolerance {tol:e} within {max_level} halvings (last change {last_change:e})")]
    QuadratureFailure {
        tol: f64,
        max_level: u32,
        last_change: f64,
    },

    #[error("information constraint violated: signal index {requested} requested at step {step}, visible up to {visible}")]
    OutOfWindow {
        step: usize,
        requested: usize,
        visible: usize,
    },

    #[error("price index {requested} requested at step {step}: prices are only known up to the present")]
    FuturePrice { step: usize, requested: usize },

    #[error("strategy returned non-finite rate {rate} at step {step}")]
    NonFiniteRate { step: usize, rate: f64 },

    #[error("time shift is flat at s = {s}: per-s dual problem undefined")]
    DegenerateShift { s: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::NoConvergence { .. }
                | Error::NotPositiveDefinite { .. }
        )
    }
}
