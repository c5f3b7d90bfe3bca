use crate::closed_form::signal_integral;
use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};

/// Value of the dual problem in the baseline model: the initial-position
/// minimum `-tanh(sqrt(rho) T) phi0^2 / (2 sqrt(rho))` plus half the signal
/// integral. The noise part contributes zero.
pub fn dual_value(model: &ValidatedModel, ts: &TimeShift, phi0: f64) -> Result<f64> {
    if !model.is_baseline() {
        return Err(Error::NotApplicable(
            "dual value is defined for the baseline model; reduce the model first".into(),
        ));
    }
    let k = model.sqrt_rho();
    let position = -(k * model.horizon()).tanh() * phi0 * phi0 / (2.0 * k);
    Ok(position + 0.5 * signal_integral(model, ts)?)
}
