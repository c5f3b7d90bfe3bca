use super::grid::SimGrid;
use super::paths::PathBundle;
use crate::error::{Error, Result};

/// Affine relabelling of what a strategy observes: prices become
/// `(S - price_offset) / price_scale` and the signal gains a drift
/// `signal_drift * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewTransform {
    pub price_offset: f64,
    pub price_scale: f64,
    pub signal_drift: f64,
}

impl ViewTransform {
    pub const IDENTITY: Self = Self {
        price_offset: 0.0,
        price_scale: 1.0,
        signal_drift: 0.0,
    };

    /// Applies `self` first, then `outer`.
    pub fn then(self, outer: ViewTransform) -> ViewTransform {
        ViewTransform {
            price_offset: self.price_offset + outer.price_offset * self.price_scale,
            price_scale: self.price_scale * outer.price_scale,
            signal_drift: self.signal_drift + outer.signal_drift,
        }
    }
}

impl Default for ViewTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// What an investor knows at grid node `step`: prices up to now and the
/// signal `W'` up to the window edge. Reads beyond either are errors.
#[derive(Debug, Clone, Copy)]
pub struct SignalView<'a> {
    path: &'a PathBundle,
    step: usize,
    transform: ViewTransform,
}

impl<'a> SignalView<'a> {
    pub(crate) fn new(path: &'a PathBundle, step: usize) -> Self {
        Self {
            path,
            step,
            transform: ViewTransform::IDENTITY,
        }
    }

    /// The same information seen through an additional relabelling.
    pub fn transformed(&self, outer: ViewTransform) -> SignalView<'a> {
        SignalView {
            transform: self.transform.then(outer),
            ..*self
        }
    }

    pub fn grid(&self) -> &'a SimGrid {
        self.path.grid()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.grid().t(self.step)
    }

    /// Index of the last visible signal node.
    pub fn edge(&self) -> usize {
        self.grid().edge(self.step)
    }

    pub fn price(&self, j: usize) -> Result<f64> {
        if j > self.step {
            return Err(Error::FuturePrice {
                step: self.step,
                requested: j,
            });
        }
        let tr = &self.transform;
        Ok((self.path.prices()[j] - tr.price_offset) / tr.price_scale)
    }

    pub fn price_now(&self) -> f64 {
        self.price(self.step).expect("current price is always visible")
    }

    pub fn signal(&self, j: usize) -> Result<f64> {
        let visible = self.edge();
        if j > visible {
            return Err(Error::OutOfWindow {
                step: self.step,
                requested: j,
                visible,
            });
        }
        Ok(self.path.wprime()[j] + self.transform.signal_drift * self.grid().t(j))
    }

    pub fn signal_now(&self) -> f64 {
        self.signal(self.step).expect("current signal is always visible")
    }
}
