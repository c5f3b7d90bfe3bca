//! Analytic formulas: the kernel `Upsilon`, the optimal value, the
//! certainty equivalent and the Merton ratio.

use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};
use crate::quadrature::{integrate_panels, QuadratureOptions};

/// `Upsilon_t(h)` and its derivative in `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonValue {
    pub value: f64,
    pub derivative: f64,
}

/// `tanh(x) / x`, continuous at zero.
pub(crate) fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

/// Kernel evaluation from raw ingredients: `theta = tanh(sqrt_rho (T - tau(t)))`.
pub(crate) fn upsilon_raw(gamma_bar: f64, sqrt_rho: f64, theta: f64, h: f64) -> UpsilonValue {
    let beta = gamma_bar * sqrt_rho;
    let (sh, ch) = ((beta * h).sinh(), (beta * h).cosh());
    UpsilonValue {
        value: gamma_bar * ch + theta * sh,
        derivative: gamma_bar * beta * sh + theta * beta * ch,
    }
}

fn check_range(what: &'static str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if x >= lo && x <= hi {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what,
            value: x,
            lo,
            hi,
        })
    }
}

/// `Upsilon_t(h) = gamma_bar cosh(gamma_bar sqrt(rho) h)
///   + tanh(sqrt(rho) (T - tau(t))) sinh(gamma_bar sqrt(rho) h)`.
pub fn upsilon(model: &ValidatedModel, tau_of_t: f64, h: f64) -> Result<UpsilonValue> {
    let horizon = model.horizon();
    check_range("tau(t)", tau_of_t, 0.0, horizon)?;
    check_range("h", h, 0.0, f64::INFINITY)?;
    let k = model.sqrt_rho();
    let theta = (k * (horizon - tau_of_t)).tanh();
    Ok(upsilon_raw(model.gamma_bar(), k, theta, h))
}

/// Signal density `gamma^2 sqrt(rho) / (gamma_bar coth(gamma_bar sqrt(rho) age)
/// + tanh(sqrt(rho) time_to_go))` in the stable form
/// `gamma^2 sqrt(rho) u / (1 + tanh(sqrt(rho) time_to_go) u)` with
/// `u = tanh(gamma_bar sqrt(rho) age) / gamma_bar`.
///
/// Unlike the model accessors this accepts `gamma_bar = 0`.
pub fn signal_density(gamma: f64, gamma_bar: f64, sqrt_rho: f64, time_to_go: f64, age: f64) -> f64 {
    if gamma == 0.0 || age <= 0.0 {
        return 0.0;
    }
    let u = sqrt_rho * age * tanhc(gamma_bar * sqrt_rho * age);
    gamma * gamma * sqrt_rho * u / (1.0 + (sqrt_rho * time_to_go).tanh() * u)
}

fn check_horizon(model: &ValidatedModel, ts: &TimeShift) -> Result<()> {
    if ts.horizon() == model.horizon() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: "time_shift",
            reason: format!(
                "time shift horizon {} differs from model horizon {}",
                ts.horizon(),
                model.horizon()
            ),
        })
    }
}

/// Integrand of the signal term of the optimal value at time `t`,
/// with age `t - tau^{-1}(t)`.
pub fn value_integrand(model: &ValidatedModel, ts: &TimeShift, t: f64) -> Result<f64> {
    check_horizon(model, ts)?;
    let age = t - ts.inverse(t)?;
    Ok(signal_density(
        model.gamma(),
        model.gamma_bar(),
        model.sqrt_rho(),
        model.horizon() - t,
        age,
    ))
}

/// `int_a^b value_integrand dt`, with every kink of `tau` and its inverse
/// used as a panel edge.
pub fn signal_integral_over(model: &ValidatedModel, ts: &TimeShift, a: f64, b: f64) -> Result<f64> {
    check_horizon(model, ts)?;
    let horizon = model.horizon();
    check_range("a", a, 0.0, horizon)?;
    check_range("b", b, a, horizon)?;
    if model.gamma() == 0.0 || a == b {
        return Ok(0.0);
    }
    let mut edges = vec![a];
    edges.extend(ts.kinks().into_iter().filter(|&x| x > a && x < b));
    edges.push(b);
    let (g, gb, k) = (model.gamma(), model.gamma_bar(), model.sqrt_rho());
    integrate_panels(
        |t| signal_density(g, gb, k, horizon - t, t - ts.inverse_unchecked(t)),
        &edges,
        QuadratureOptions::default(),
    )
}

/// `int_0^T value_integrand dt`.
pub fn signal_integral(model: &ValidatedModel, ts: &TimeShift) -> Result<f64> {
    signal_integral_over(model, ts, 0.0, model.horizon())
}

/// The optimal value and the pieces of its exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueComponents {
    /// `alpha Lambda sqrt(rho) tanh(sqrt(rho) T) / 2 * (phi0 - merton)^2`
    pub position_term: f64,
    /// `-mu^2 T / (2 sigma^2)`
    pub drift_term: f64,
    /// `int_0^T value_integrand dt`
    pub signal_integral: f64,
    pub exponent: f64,
    pub value: f64,
}

pub fn value_components(model: &ValidatedModel, ts: &TimeShift) -> Result<ValueComponents> {
    let p = model.params();
    let k = model.sqrt_rho();
    let gap = p.phi0 - model.merton_ratio();
    let position_term =
        0.5 * p.alpha * p.lambda_impact * k * (k * p.horizon_t).tanh() * gap * gap;
    let drift_term = -p.mu * p.mu * p.horizon_t / (2.0 * p.sigma * p.sigma);
    let signal = signal_integral(model, ts)?;
    let exponent = position_term + drift_term - 0.5 * signal;
    Ok(ValueComponents {
        position_term,
        drift_term,
        signal_integral: signal,
        exponent,
        value: -exponent.exp(),
    })
}

/// Maximal expected utility `sup E[-exp(-alpha V_T)]`.
pub fn optimal_value(model: &ValidatedModel, ts: &TimeShift) -> Result<f64> {
    Ok(value_components(model, ts)?.value)
}

/// `c = (1 / (2 alpha)) int_0^T value_integrand dt`, the cash value of the
/// signal.
pub fn certainty_equivalent(model: &ValidatedModel, ts: &TimeShift) -> Result<f64> {
    Ok(signal_integral(model, ts)? / (2.0 * model.params().alpha))
}

/// `mu / (alpha sigma^2)`.
pub fn merton_ratio(model: &ValidatedModel) -> f64 {
    model.merton_ratio()
}
