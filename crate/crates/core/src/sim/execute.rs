use super::paths::PathBundle;
use super::strategy::{RateRule, Strategy};
use super::view::SignalView;
use crate::error::{Error, Result};
use crate::model::ValidatedModel;

/// Executed trading of one strategy on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTrace {
    /// Rate chosen at each grid node before the last.
    pub rates: Vec<f64>,
    /// Position at every grid node.
    pub positions: Vec<f64>,
    pub terminal_wealth: f64,
}

/// Runs `rule` along `path` with explicit Euler positions and a left
/// Riemann sum for `V_T = phi0 (S_T - S_0) + int phi (S_T - S) - Lambda/2 phi^2 dt`.
fn run(
    model: &ValidatedModel,
    path: &PathBundle,
    rule: &mut dyn RateRule,
    phi0: f64,
    mut record: Option<(&mut Vec<f64>, &mut Vec<f64>)>,
) -> Result<f64> {
    let grid = path.grid();
    let s = path.prices();
    let s_end = s[grid.n_steps()];
    let half_lambda = 0.5 * model.params().lambda_impact;
    let mut position = phi0;
    let mut wealth = phi0 * (s_end - s[0]);
    if let Some((_, positions)) = record.as_mut() {
        positions.push(position);
    }
    for i in 0..grid.n_steps() {
        let rate = rule.rate(&SignalView::new(path, i), position)?;
        if !rate.is_finite() {
            return Err(Error::NonFiniteRate { step: i, rate });
        }
        let dt = grid.dt(i);
        wealth += (rate * (s_end - s[i]) - half_lambda * rate * rate) * dt;
        position += rate * dt;
        if let Some((rates, positions)) = record.as_mut() {
            rates.push(rate);
            positions.push(position);
        }
    }
    Ok(wealth)
}

pub fn execute_rule(
    model: &ValidatedModel,
    path: &PathBundle,
    rule: &mut dyn RateRule,
    phi0: f64,
) -> Result<StrategyTrace> {
    let n = path.grid().n_steps();
    let mut rates = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n + 1);
    let terminal_wealth = run(model, path, rule, phi0, Some((&mut rates, &mut positions)))?;
    Ok(StrategyTrace {
        rates,
        positions,
        terminal_wealth,
    })
}

pub fn execute_strategy(
    model: &ValidatedModel,
    path: &PathBundle,
    strategy: &dyn Strategy,
    phi0: f64,
) -> Result<StrategyTrace> {
    let mut rule = strategy.begin_path(path.grid())?;
    execute_rule(model, path, rule.as_mut(), phi0)
}

/// Terminal wealth only, without recording the trace.
pub fn terminal_wealth(
    model: &ValidatedModel,
    path: &PathBundle,
    strategy: &dyn Strategy,
    phi0: f64,
) -> Result<f64> {
    let mut rule = strategy.begin_path(path.grid())?;
    run(model, path, rule.as_mut(), phi0, None)
}
