use std::sync::Arc;

use super::grid::SimGrid;
use super::view::{SignalView, ViewTransform};
use crate::error::Result;
use crate::model::{BaselineReduction, ValidatedModel};

/// Per-path trading rule. `rate` is called once per grid step, in order,
/// with the position held at that step.
pub trait RateRule {
    fn rate(&mut self, view: &SignalView<'_>, position: f64) -> Result<f64>;
}

/// A strategy: a recipe for a fresh [`RateRule`] on every path.
pub trait Strategy: Send + Sync {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>>;
}

impl<S: Strategy + ?Sized> Strategy for &S {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        (**self).begin_path(grid)
    }
}

impl<S: Strategy + ?Sized> Strategy for Arc<S> {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        (**self).begin_path(grid)
    }
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        (**self).begin_path(grid)
    }
}

/// Never trades.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroStrategy;

impl RateRule for ZeroStrategy {
    fn rate(&mut self, _: &SignalView<'_>, _: f64) -> Result<f64> {
        Ok(0.0)
    }
}

impl Strategy for ZeroStrategy {
    fn begin_path<'a>(&'a self, _: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        Ok(Box::new(ZeroStrategy))
    }
}

/// Stateless strategy from a closure of the view and the current position.
pub struct FnStrategy<F>(pub F);

struct FnRule<'a, F>(&'a F);

impl<F> RateRule for FnRule<'_, F>
where
    F: Fn(&SignalView<'_>, f64) -> Result<f64>,
{
    fn rate(&mut self, view: &SignalView<'_>, position: f64) -> Result<f64> {
        (self.0)(view, position)
    }
}

impl<F> Strategy for FnStrategy<F>
where
    F: Fn(&SignalView<'_>, f64) -> Result<f64> + Send + Sync,
{
    fn begin_path<'a>(&'a self, _: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        Ok(Box::new(FnRule(&self.0)))
    }
}

/// `base + epsilon * direction`, both evaluated on the same information.
pub struct Perturbed<B, D> {
    pub base: B,
    pub direction: D,
    pub epsilon: f64,
}

struct PerturbedRule<'a> {
    base: Box<dyn RateRule + 'a>,
    direction: Box<dyn RateRule + 'a>,
    epsilon: f64,
}

impl RateRule for PerturbedRule<'_> {
    fn rate(&mut self, view: &SignalView<'_>, position: f64) -> Result<f64> {
        let base = self.base.rate(view, position)?;
        let dir = self.direction.rate(view, position)?;
        Ok(base + self.epsilon * dir)
    }
}

impl<B: Strategy, D: Strategy> Strategy for Perturbed<B, D> {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        Ok(Box::new(PerturbedRule {
            base: self.base.begin_path(grid)?,
            direction: self.direction.begin_path(grid)?,
            epsilon: self.epsilon,
        }))
    }
}

pub fn perturb_rule<B: Strategy, D: Strategy>(base: B, direction: D, epsilon: f64) -> Perturbed<B, D> {
    Perturbed {
        base,
        direction,
        epsilon,
    }
}

/// A baseline-model strategy run in a general model: it observes baseline
/// prices `(S - s0) / sigma` and the drift-shifted signal, and its rate is
/// scaled back by `1 / (alpha sigma)`.
pub struct Lifted<S> {
    inner: S,
    transform: ViewTransform,
    position_scale: f64,
    position_shift: f64,
}

struct LiftedRule<'a> {
    inner: Box<dyn RateRule + 'a>,
    transform: ViewTransform,
    position_scale: f64,
    position_shift: f64,
}

impl RateRule for LiftedRule<'_> {
    fn rate(&mut self, view: &SignalView<'_>, position: f64) -> Result<f64> {
        let baseline_view = view.transformed(self.transform);
        let baseline_position = self.position_scale * position - self.position_shift;
        Ok(self.inner.rate(&baseline_view, baseline_position)? / self.position_scale)
    }
}

impl<S: Strategy> Strategy for Lifted<S> {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        Ok(Box::new(LiftedRule {
            inner: self.inner.begin_path(grid)?,
            transform: self.transform,
            position_scale: self.position_scale,
            position_shift: self.position_shift,
        }))
    }
}

pub fn lift_baseline_strategy<S: Strategy>(reduction: &BaselineReduction, baseline_rule: S) -> Lifted<S> {
    Lifted {
        inner: baseline_rule,
        transform: ViewTransform {
            price_offset: reduction.s0,
            price_scale: reduction.sigma,
            signal_drift: reduction.signal_drift,
        },
        position_scale: reduction.position_scale,
        position_shift: reduction.mu / reduction.sigma,
    }
}

/// The optimal rule without any signal: trade towards the Merton ratio at
/// rate `sqrt(rho) tanh(sqrt(rho) (T - t))`.
#[derive(Debug, Clone, Copy)]
pub struct MertonChase {
    sqrt_rho: f64,
    horizon: f64,
    merton: f64,
}

impl MertonChase {
    pub fn new(model: &ValidatedModel) -> Self {
        Self {
            sqrt_rho: model.sqrt_rho(),
            horizon: model.horizon(),
            merton: model.merton_ratio(),
        }
    }
}

impl RateRule for MertonChase {
    fn rate(&mut self, view: &SignalView<'_>, position: f64) -> Result<f64> {
        let k = self.sqrt_rho;
        Ok(k * (k * (self.horizon - view.time())).tanh() * (self.merton - position))
    }
}

impl Strategy for MertonChase {
    fn begin_path<'a>(&'a self, _: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        Ok(Box::new(*self))
    }
}
