use std::sync::{Arc, Mutex};

use super::grid::SimGrid;
use super::paths::PathBundle;
use super::strategy::{RateRule, Strategy};
use super::view::SignalView;
use crate::closed_form::upsilon_raw;
use crate::error::{Error, Result};
use crate::model::ValidatedModel;

/// Where the kernel `Upsilon'` of the price projection is anchored.
///
/// With `FromWindowEdge` the estimate `S_hat(t, h)` is weighted by
/// `Upsilon'(D - h)`, `D` the window length, so the estimates furthest
/// ahead carry the largest weight. `FromNow` weights by `Upsilon'(h)`; it
/// matches the value formula only to first order and is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelOrientation {
    #[default]
    FromWindowEdge,
    FromNow,
}

/// `S_hat(t_i, t_j - t_i) = S_i + mu gamma^2 h + sigma gamma (W'_j - W'_i)`.
pub fn signal_estimate(model: &ValidatedModel, path: &PathBundle, i: usize, j: usize) -> Result<f64> {
    let grid = path.grid();
    let e = grid.edge(i);
    if j > e {
        return Err(Error::OutOfWindow {
            step: i,
            requested: j,
            visible: e,
        });
    }
    if j < i {
        return Err(Error::OutOfDomain {
            what: "j",
            value: j as f64,
            lo: i as f64,
            hi: e as f64,
        });
    }
    let p = model.params();
    let g = model.gamma();
    let h = grid.t(j) - grid.t(i);
    let wp = path.wprime();
    Ok(path.prices()[i] + p.mu * g * g * h + p.sigma * g * (wp[j] - wp[i]))
}

/// Trapezoid weight of node `j` on the node range `lo..=hi`.
fn trapezoid_weight(grid: &SimGrid, lo: usize, hi: usize, j: usize) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let left = if j > lo { grid.t(j) - grid.t(j - 1) } else { 0.0 };
    let right = if j < hi { grid.t(j + 1) - grid.t(j) } else { 0.0 };
    0.5 * (left + right)
}

struct Window {
    edge: usize,
    /// Integral weights of nodes `i..=edge`.
    weights: Vec<f64>,
    /// `Upsilon(0) = gamma_bar`, placed on the window edge.
    atom: f64,
    /// `Upsilon'(D) / Upsilon(D)`.
    kappa: f64,
}

fn window(model: &ValidatedModel, grid: &SimGrid, i: usize, orientation: KernelOrientation) -> Window {
    let e = grid.edge(i);
    let k = model.sqrt_rho();
    let gb = model.gamma_bar();
    let theta = (k * (grid.horizon() - grid.t(e))).tanh();
    let d = grid.t(e) - grid.t(i);
    let weights = (i..=e)
        .map(|j| {
            let h = grid.t(j) - grid.t(i);
            let arg = match orientation {
                KernelOrientation::FromWindowEdge => d - h,
                KernelOrientation::FromNow => h,
            };
            trapezoid_weight(grid, i, e, j) * upsilon_raw(gb, k, theta, arg).derivative
        })
        .collect();
    let full = upsilon_raw(gb, k, theta, d);
    Window {
        edge: e,
        weights,
        atom: gb,
        kappa: full.derivative / full.value,
    }
}

/// The weighted average `S_bar` of the estimates over the signal window,
/// normalised by the discrete total weight.
pub fn projection_with(
    model: &ValidatedModel,
    path: &PathBundle,
    i: usize,
    orientation: KernelOrientation,
) -> Result<f64> {
    let win = window(model, path.grid(), i, orientation);
    let mut num = win.atom * signal_estimate(model, path, i, win.edge)?;
    let mut den = win.atom;
    for (off, &w) in win.weights.iter().enumerate() {
        num += w * signal_estimate(model, path, i, i + off)?;
        den += w;
    }
    Ok(num / den)
}

pub fn projection(model: &ValidatedModel, path: &PathBundle, i: usize) -> Result<f64> {
    projection_with(model, path, i, KernelOrientation::default())
}

/// `(S_bar - S) / Lambda + (Upsilon'(D) / Upsilon(D)) (merton - position)`.
pub fn optimal_rate_with(
    model: &ValidatedModel,
    path: &PathBundle,
    i: usize,
    position: f64,
    orientation: KernelOrientation,
) -> Result<f64> {
    let s_bar = projection_with(model, path, i, orientation)?;
    let win = window(model, path.grid(), i, orientation);
    let p = model.params();
    Ok((s_bar - path.prices()[i]) / p.lambda_impact + win.kappa * (model.merton_ratio() - position))
}

pub fn optimal_rate(model: &ValidatedModel, path: &PathBundle, i: usize, position: f64) -> Result<f64> {
    optimal_rate_with(model, path, i, position, KernelOrientation::default())
}

/// Above this `gamma_bar sqrt(rho) T` the exponential prefix sums lose too
/// much precision and windows are summed directly.
const MAX_PREFIX_EXPONENT: f64 = 10.0;

/// Per-grid coefficients of the optimal rule.
struct Tables {
    grid_id: u64,
    edge: Vec<usize>,
    /// Total weight, integral part plus atom.
    total: Vec<f64>,
    /// `sum_j w_j h_j + atom * D`.
    moment: Vec<f64>,
    kappa: Vec<f64>,
    atom: f64,
    kernel: Kernel,
}

enum Kernel {
    /// `sum_j w_j W'_j = a_i (Qm[e] - Qm[i]) + b_i (Qp[e] - Qp[i])`, where
    /// `Qm`, `Qp` are trapezoid prefix sums of `exp(-/+ beta t) W'`.
    Prefix {
        exp_minus: Vec<f64>,
        exp_plus: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
    },
    /// Explicit weights of every window, concatenated.
    Direct { offsets: Vec<usize>, weights: Vec<f64> },
}

impl Tables {
    fn build(model: &ValidatedModel, grid: &SimGrid, orientation: KernelOrientation) -> Self {
        let n = grid.len();
        let k = model.sqrt_rho();
        let gb = model.gamma_bar();
        let beta = gb * k;
        let mut edge = Vec::with_capacity(n);
        let mut total = Vec::with_capacity(n);
        let mut moment = Vec::with_capacity(n);
        let mut kappa = Vec::with_capacity(n);
        let direct = beta * grid.horizon() > MAX_PREFIX_EXPONENT;
        let mut offsets = vec![0];
        let mut flat = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..n {
            let win = window(model, grid, i, orientation);
            let e = win.edge;
            let ti = grid.t(i);
            let d = grid.t(e) - ti;
            let wsum: f64 = win.weights.iter().sum();
            let wh: f64 = win
                .weights
                .iter()
                .enumerate()
                .map(|(off, w)| w * (grid.t(i + off) - ti))
                .sum();
            edge.push(e);
            total.push(wsum + win.atom);
            moment.push(wh + win.atom * d);
            kappa.push(win.kappa);
            if direct {
                flat.extend_from_slice(&win.weights);
                offsets.push(flat.len());
            } else {
                let theta = (k * (grid.horizon() - grid.t(e))).tanh();
                // Upsilon'(x) = cp e^{beta x} + cm e^{-beta x}
                let cp = 0.5 * beta * (gb + theta);
                let cm = 0.5 * beta * (theta - gb);
                match orientation {
                    KernelOrientation::FromWindowEdge => {
                        let te = grid.t(e);
                        a.push(cp * (beta * te).exp());
                        b.push(cm * (-beta * te).exp());
                    }
                    KernelOrientation::FromNow => {
                        a.push(cm * (beta * ti).exp());
                        b.push(cp * (-beta * ti).exp());
                    }
                }
            }
        }
        let kernel = if direct {
            Kernel::Direct {
                offsets,
                weights: flat,
            }
        } else {
            Kernel::Prefix {
                exp_minus: grid.times().iter().map(|t| (-beta * t).exp()).collect(),
                exp_plus: grid.times().iter().map(|t| (beta * t).exp()).collect(),
                a,
                b,
            }
        };
        Self {
            grid_id: grid.id(),
            edge,
            total,
            moment,
            kappa,
            atom: gb,
            kernel,
        }
    }
}

/// The optimal strategy, evaluated in O(1) per step.
pub struct OptimalStrategy {
    model: ValidatedModel,
    orientation: KernelOrientation,
    cache: Mutex<Option<Arc<Tables>>>,
}

impl OptimalStrategy {
    pub fn new(model: &ValidatedModel) -> Self {
        Self::with_orientation(model, KernelOrientation::default())
    }

    pub fn with_orientation(model: &ValidatedModel, orientation: KernelOrientation) -> Self {
        Self {
            model: *model,
            orientation,
            cache: Mutex::new(None),
        }
    }

    fn tables(&self, grid: &SimGrid) -> Arc<Tables> {
        let mut slot = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        match slot.as_ref() {
            Some(t) if t.grid_id == grid.id() => Arc::clone(t),
            _ => {
                let t = Arc::new(Tables::build(&self.model, grid, self.orientation));
                *slot = Some(Arc::clone(&t));
                t
            }
        }
    }
}

struct OptimalRule<'a> {
    model: &'a ValidatedModel,
    grid: &'a SimGrid,
    tables: Arc<Tables>,
    /// Signal values read so far.
    signal: Vec<f64>,
    q_minus: Vec<f64>,
    q_plus: Vec<f64>,
}

impl OptimalRule<'_> {
    fn observe_to(&mut self, view: &SignalView<'_>, e: usize) -> Result<()> {
        while self.signal.len() <= e {
            let j = self.signal.len();
            let x = view.signal(j)?;
            self.signal.push(x);
            if let Kernel::Prefix {
                exp_minus,
                exp_plus,
                ..
            } = &self.tables.kernel
            {
                if j == 0 {
                    self.q_minus.push(0.0);
                    self.q_plus.push(0.0);
                } else {
                    let half = 0.5 * (self.grid.t(j) - self.grid.t(j - 1));
                    let prev = self.signal[j - 1];
                    let qm = self.q_minus[j - 1] + half * (exp_minus[j - 1] * prev + exp_minus[j] * x);
                    let qp = self.q_plus[j - 1] + half * (exp_plus[j - 1] * prev + exp_plus[j] * x);
                    self.q_minus.push(qm);
                    self.q_plus.push(qp);
                }
            }
        }
        Ok(())
    }
}

impl RateRule for OptimalRule<'_> {
    fn rate(&mut self, view: &SignalView<'_>, position: f64) -> Result<f64> {
        let i = view.step();
        let tb = Arc::clone(&self.tables);
        let e = tb.edge[i];
        self.observe_to(view, e)?;
        let weighted = match &tb.kernel {
            Kernel::Prefix { a, b, .. } => {
                a[i] * (self.q_minus[e] - self.q_minus[i]) + b[i] * (self.q_plus[e] - self.q_plus[i])
            }
            Kernel::Direct { offsets, weights } => weights[offsets[i]..offsets[i + 1]]
                .iter()
                .zip(&self.signal[i..=e])
                .map(|(w, x)| w * x)
                .sum(),
        };
        let p = self.model.params();
        let g = self.model.gamma();
        let now = self.signal[i];
        let gap = (p.mu * g * g * tb.moment[i]
            + p.sigma * g * (weighted + tb.atom * self.signal[e] - now * tb.total[i]))
            / tb.total[i];
        Ok(gap / p.lambda_impact + tb.kappa[i] * (self.model.merton_ratio() - position))
    }
}

impl Strategy for OptimalStrategy {
    fn begin_path<'a>(&'a self, grid: &'a SimGrid) -> Result<Box<dyn RateRule + 'a>> {
        let tables = self.tables(grid);
        Ok(Box::new(OptimalRule {
            model: &self.model,
            grid,
            tables,
            signal: Vec::with_capacity(grid.len()),
            q_minus: Vec::with_capacity(grid.len()),
            q_plus: Vec::with_capacity(grid.len()),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, TimeShift};
    use crate::sim::paths::{simulate_paths, PathBundle};
    use approx::assert_relative_eq;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn general() -> ValidatedModel {
        ModelParams {
            s0: 1.0,
            mu: 0.3,
            sigma: 1.2,
            gamma: 0.6,
            lambda_impact: 0.8,
            alpha: 1.5,
            horizon_t: 1.0,
            phi0: 0.4,
        }
        .validate()
        .unwrap()
    }

    /// Five nodes on [0, 1], tau(t) = (t + 0.5) ^ 1.
    fn fixture(model: &ValidatedModel) -> PathBundle {
        let ts = TimeShift::constant_lookahead(0.5, 1.0).unwrap();
        let grid = Arc::new(SimGrid::new(&ts, 4).unwrap());
        let w = vec![0.0, 0.1, -0.2, 0.05, 0.3];
        let wp = vec![0.0, 0.2, 0.5, 0.1, -0.3];
        PathBundle::from_drivers(model, grid, w, wp).unwrap()
    }

    #[test]
    fn signal_estimate_fixture() {
        let m = general();
        let p = fixture(&m);
        // S_1 = 1 + 0.075 + 1.2 (0.12 + 0.08)
        let s1 = 1.0 + 0.3 * 0.25 + 1.2 * (0.6 * 0.2 + 0.8 * 0.1);
        assert_relative_eq!(signal_estimate(&m, &p, 1, 1).unwrap(), s1, epsilon = 1e-15);
        let expect = s1 + 0.3 * 0.36 * 0.5 + 1.2 * 0.6 * (0.1 - 0.2);
        assert_relative_eq!(signal_estimate(&m, &p, 1, 3).unwrap(), expect, epsilon = 1e-15);
        assert!(matches!(
            signal_estimate(&m, &p, 1, 4),
            Err(Error::OutOfWindow { .. })
        ));
        let m0 = ModelParams { gamma: 0.0, ..*m.params() }.validate().unwrap();
        let p0 = fixture(&m0);
        for j in 1..=3 {
            assert_eq!(signal_estimate(&m0, &p0, 1, j).unwrap(), p0.prices()[1]);
        }
    }

    /// Fine-quadrature oracle: the window signal is linear between nodes, so
    /// a 10^4-node trapezoid of the exact kernel is the reference.
    fn projection_oracle(m: &ValidatedModel, p: &PathBundle, i: usize) -> f64 {
        let g = p.grid();
        let e = g.edge(i);
        let (ti, te) = (g.t(i), g.t(e));
        let d = te - ti;
        let k = m.sqrt_rho();
        let theta = (k * (g.horizon() - te)).tanh();
        let sh = |h: f64| {
            let t = ti + h;
            let j = (i..e).find(|&j| g.t(j + 1) >= t).unwrap_or(e - 1);
            let x = (t - g.t(j)) / (g.t(j + 1) - g.t(j));
            let wp = (1.0 - x) * p.wprime()[j] + x * p.wprime()[j + 1];
            let pp = m.params();
            p.prices()[i] + pp.mu * m.gamma().powi(2) * h + pp.sigma * m.gamma() * (wp - p.wprime()[i])
        };
        let n = 10_000;
        let mut num = 0.0;
        for q in 0..=n {
            let h = d * q as f64 / n as f64;
            let w = if q == 0 || q == n { 0.5 } else { 1.0 } * d / n as f64;
            num += w * sh(h) * upsilon_raw(m.gamma_bar(), k, theta, d - h).derivative;
        }
        let full = upsilon_raw(m.gamma_bar(), k, theta, d);
        (num + m.gamma_bar() * sh(d)) / full.value
    }

    #[test]
    fn projection_fixture_matches_fine_quadrature() {
        let m = ModelParams {
            s0: 1.0,
            mu: 0.3,
            sigma: 1.0,
            gamma: 0.6,
            lambda_impact: 1.0,
            alpha: 1.0,
            horizon_t: 1.0,
            phi0: 0.0,
        }
        .validate()
        .unwrap();
        let p = fixture(&m);
        // the same drivers, linear between fixture nodes, on a 4096-step grid
        let fine = {
            let ts = TimeShift::constant_lookahead(0.5, 1.0).unwrap();
            let grid = Arc::new(SimGrid::new(&ts, 4096).unwrap());
            let coarse = p.grid();
            let interp = |v: &[f64], t: f64| {
                let j = ((t * 4.0).floor() as usize).min(3);
                let x = (t - coarse.t(j)) / 0.25;
                (1.0 - x) * v[j] + x * v[j + 1]
            };
            let w = grid.times().iter().map(|&t| interp(p.w(), t)).collect();
            let wp = grid.times().iter().map(|&t| interp(p.wprime(), t)).collect();
            PathBundle::from_drivers(&m, grid, w, wp).unwrap()
        };
        for i in 0..4 {
            let got = projection(&m, &fine, 1024 * i).unwrap();
            assert_relative_eq!(got, projection_oracle(&m, &p, i), max_relative = 1e-7);
        }
    }

    #[test]
    fn projection_trivial_cases() {
        let m = general();
        let ts = TimeShift::identity(1.0).unwrap();
        let p = simulate_paths(&m, &ts, 20, 1, 0).unwrap();
        for i in 0..=20 {
            assert_relative_eq!(projection(&m, &p, i).unwrap(), p.prices()[i], max_relative = 1e-15);
        }
        let m0 = ModelParams { mu: 0.0, ..*m.params() }.validate().unwrap();
        let ts = TimeShift::constant_lookahead(0.5, 1.0).unwrap();
        let grid = Arc::new(SimGrid::new(&ts, 4).unwrap());
        let p = PathBundle::from_drivers(
            &m0,
            grid,
            vec![0.0, 0.3, 0.1, 0.2, 0.0],
            vec![0.0, 0.4, 0.4, 0.4, 0.1],
        )
        .unwrap();
        assert_relative_eq!(projection(&m0, &p, 1).unwrap(), p.prices()[1], epsilon = 1e-15);
    }

    #[test]
    fn optimal_rate_trivial_cases() {
        let m = general();
        let ts = TimeShift::identity(1.0).unwrap();
        let p = simulate_paths(&m, &ts, 20, 2, 0).unwrap();
        let k = m.sqrt_rho();
        for i in [0, 7, 20] {
            let t = p.grid().t(i);
            let got = optimal_rate(&m, &p, i, 1.3).unwrap();
            let expect = k * (k * (1.0 - t)).tanh() * (m.merton_ratio() - 1.3);
            assert_relative_eq!(got, expect, epsilon = 1e-14);
        }
        let m0 = ModelParams { mu: 0.0, ..*m.params() }.validate().unwrap();
        let p0 = simulate_paths(&m0, &ts, 20, 2, 0).unwrap();
        assert_eq!(optimal_rate(&m0, &p0, 3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn optimal_rate_fixture() {
        let m = general();
        let p = fixture(&m);
        let s_bar = projection(&m, &p, 1).unwrap();
        let full = upsilon(&m, 0.75, 0.5);
        let expect =
            (s_bar - p.prices()[1]) / 0.8 + full.derivative / full.value * (m.merton_ratio() - 0.25);
        assert_relative_eq!(optimal_rate(&m, &p, 1, 0.25).unwrap(), expect, epsilon = 1e-14);

        fn upsilon(m: &ValidatedModel, tau: f64, h: f64) -> crate::closed_form::UpsilonValue {
            crate::closed_form::upsilon(m, tau, h).unwrap()
        }
    }

    fn fast_rates(m: &ValidatedModel, p: &PathBundle, orientation: KernelOrientation) -> Vec<f64> {
        let strat = OptimalStrategy::with_orientation(m, orientation);
        let mut rule = strat.begin_path(p.grid()).unwrap();
        (0..p.grid().n_steps())
            .map(|i| rule.rate(&SignalView::new(p, i), 0.1 * i as f64).unwrap())
            .collect()
    }

    #[test]
    fn fast_rule_matches_direct_formula() {
        for (rho_scale, ts) in [
            (1.0, TimeShift::constant_lookahead(0.25, 1.0).unwrap()),
            (1.0, TimeShift::new(&[(0.0, 0.1), (0.3, 0.7), (0.5, 0.7), (1.0, 1.0)], 1.0).unwrap()),
            (400.0, TimeShift::constant_lookahead(0.3, 1.0).unwrap()),
        ] {
            let m = ModelParams {
                lambda_impact: general().params().lambda_impact / rho_scale,
                ..*general().params()
            }
            .validate()
            .unwrap();
            let p = simulate_paths(&m, &ts, 97, 9, 1).unwrap();
            for orientation in [KernelOrientation::FromWindowEdge, KernelOrientation::FromNow] {
                let fast = fast_rates(&m, &p, orientation);
                for (i, r) in fast.iter().enumerate() {
                    let direct = optimal_rate_with(&m, &p, i, 0.1 * i as f64, orientation).unwrap();
                    assert!(
                        (r - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                        "step {i}: {r} vs {direct}"
                    );
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn projection_lies_within_estimates(seed in 0u64..1000, delta in 0.0f64..1.0, gamma in -0.9f64..0.9) {
            let m = ModelParams { gamma, ..*general().params() }.validate().unwrap();
            let ts = TimeShift::constant_lookahead(delta, 1.0).unwrap();
            let p = simulate_paths(&m, &ts, 30, seed, 0).unwrap();
            for i in 0..p.grid().len() {
                let e = p.grid().edge(i);
                let est: Vec<f64> = (i..=e).map(|j| signal_estimate(&m, &p, i, j).unwrap()).collect();
                let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let s = projection(&m, &p, i).unwrap();
                let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                prop_assert!(s >= lo - slack && s <= hi + slack);
            }
        }
    }
}
