//! The noise part of the dual functional,
//!
//! ```text
//! 1/2 int_0^{L} int_s^{L} m^2 + 1/2 int_0^T int_s^T m_tilde^2
//!   + rho/2 int_0^T int_s^T (gamma 1{s <= L} int_{max(s, tau^{-1}(t))}^{L} sqrt(tau') m(u, s) du
//!                            + gamma_bar int_t^T m_tilde(u, s) du)^2 dt ds
//! ```
//!
//! with `L = tau^{-1}(T)` and kernels `m(t, s)`, `m_tilde(t, s)` on `s <= t`.

use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};

/// Tensor grid for the kernels: nodes on `[0, T]` containing `tau^{-1}(T)`
/// and the kinks of `tau` below it. `m` is stored on pairs `s_b <= t_a <= L`
/// with `s_b < L`, `m_tilde` on `s_b <= t_a <= T` with `s_b < T`, column by
/// column in `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi3Grid {
    nodes: Vec<f64>,
    last_main: usize,
    slopes_root: Vec<f64>,
}

impl Psi3Grid {
    /// Uniform `n`-interval grid merged with the kinks.
    pub fn new(ts: &TimeShift, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                field: "n",
                reason: "must be positive".into(),
            });
        }
        let horizon = ts.horizon();
        let end = ts.inverse_horizon();
        let tol = 1e-9 * horizon;
        let mut nodes: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        nodes.extend(ts.kinks().into_iter().filter(|&k| k <= end));
        nodes.push(end);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let last = nodes.len() - 1;
        nodes[last] = horizon;
        let last_main = nodes
            .iter()
            .position(|&x| (x - end).abs() <= tol)
            .unwrap_or(last);
        let slopes_root = nodes
            .windows(2)
            .map(|p| ts.slope_unchecked(0.5 * (p[0] + p[1])).sqrt())
            .collect();
        Ok(Self {
            nodes,
            last_main,
            slopes_root,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the node `tau^{-1}(T)`.
    pub fn last_main(&self) -> usize {
        self.last_main
    }

    fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    fn offset(top: usize, b: usize) -> usize {
        b * (top + 1) - b * (b.saturating_sub(1)) / 2
    }

    pub fn main_len(&self) -> usize {
        Self::offset(self.last_main, self.last_main)
    }

    pub fn tilde_len(&self) -> usize {
        Self::offset(self.n(), self.n())
    }

    /// Position of `m(t_a, s_b)` in the main vector.
    pub fn main_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(b <= a && a <= self.last_main && b < self.last_main);
        Self::offset(self.last_main, b) + a - b
    }

    /// Position of `m_tilde(t_a, s_b)` in the tilde vector.
    pub fn tilde_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(b <= a && a <= self.n() && b < self.n());
        Self::offset(self.n(), b) + a - b
    }

    /// Samples kernels given as functions of `(t, s)`.
    pub fn sample<M, N>(&self, m: M, m_tilde: N) -> (Vec<f64>, Vec<f64>)
    where
        M: Fn(f64, f64) -> f64,
        N: Fn(f64, f64) -> f64,
    {
        let x = &self.nodes;
        let mut mv = Vec::with_capacity(self.main_len());
        for b in 0..self.last_main {
            for a in b..=self.last_main {
                mv.push(m(x[a], x[b]));
            }
        }
        let mut tv = Vec::with_capacity(self.tilde_len());
        for b in 0..self.n() {
            for a in b..=self.n() {
                tv.push(m_tilde(x[a], x[b]));
            }
        }
        (mv, tv)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(p, q)| 0.5 * (p[1] - p[0]) * (q[0] + q[1]))
        .sum()
}

/// Trapezoid discretization of the functional on `grid`.
pub fn psi3_eval(
    m_vec: &[f64],
    mtilde_vec: &[f64],
    model: &ValidatedModel,
    ts: &TimeShift,
    grid: &Psi3Grid,
) -> Result<f64> {
    if ts.horizon() != model.horizon() || *grid.nodes.last().unwrap() != model.horizon() {
        return Err(Error::InvalidParameter {
            field: "time_shift",
            reason: "time shift, grid and model horizons differ".into(),
        });
    }
    for (v, len) in [(m_vec, grid.main_len()), (mtilde_vec, grid.tilde_len())] {
        if v.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: v.len(),
            });
        }
    }
    let (g, gb, rho) = (model.gamma(), model.gamma_bar(), model.rho());
    let x = &grid.nodes;
    let n = grid.n();
    let lm = grid.last_main;

    let mut outer_energy = vec![0.0; n + 1];
    let mut outer_penalty = vec![0.0; n + 1];
    let mut cum_main = vec![0.0; lm + 1];
    let mut cum_tilde = vec![0.0; n + 1];
    let mut f = vec![0.0; n + 1];
    for b in 0..n {
        let tilde = &mtilde_vec[grid.tilde_index(b, b)..grid.tilde_index(b, b) + n + 1 - b];
        let mut energy = trapezoid(&x[b..], &tilde.iter().map(|v| v * v).collect::<Vec<_>>());
        // cumulative integrals from the top
        cum_tilde[n] = 0.0;
        for a in (b..n).rev() {
            cum_tilde[a] = cum_tilde[a + 1] + 0.5 * (x[a + 1] - x[a]) * (tilde[a - b] + tilde[a + 1 - b]);
        }
        let has_main = b < lm;
        if has_main {
            let main = &m_vec[grid.main_index(b, b)..grid.main_index(b, b) + lm + 1 - b];
            energy += trapezoid(&x[b..=lm], &main.iter().map(|v| v * v).collect::<Vec<_>>());
            cum_main[lm] = 0.0;
            for a in (b..lm).rev() {
                cum_main[a] = cum_main[a + 1]
                    + grid.slopes_root[a] * 0.5 * (x[a + 1] - x[a]) * (main[a - b] + main[a + 1 - b]);
            }
        }
        for a in b..=n {
            let mut v = gb * cum_tilde[a];
            if has_main {
                let lower = x[b].max(ts.inverse_unchecked(x[a]));
                v += g * interpolate(&x[b..=lm], &cum_main[b..=lm], lower);
            }
            f[a] = v * v;
        }
        outer_energy[b] = 0.5 * energy;
        outer_penalty[b] = 0.5 * rho * trapezoid(&x[b..], &f[b..]);
    }
    Ok(trapezoid(x, &outer_energy) + trapezoid(x, &outer_penalty))
}

fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if n == 1 || at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let k = x.partition_point(|&v| v <= at).clamp(1, n - 1);
    let w = (at - x[k - 1]) / (x[k] - x[k - 1]);
    y[k - 1] + w * (y[k] - y[k - 1])
}
