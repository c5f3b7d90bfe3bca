use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::grid::SimGrid;
use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};

/// One scenario: the grid with sampled `W`, `W'` and the resulting prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    grid: Arc<SimGrid>,
    w: Vec<f64>,
    wprime: Vec<f64>,
    s: Vec<f64>,
}

impl PathBundle {
    /// Builds a scenario from given driver values on `grid`.
    pub fn from_drivers(
        model: &ValidatedModel,
        grid: Arc<SimGrid>,
        w: Vec<f64>,
        wprime: Vec<f64>,
    ) -> Result<Self> {
        for v in [&w, &wprime] {
            if v.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: v.len(),
                });
            }
        }
        if w[0] != 0.0 || wprime[0] != 0.0 {
            return Err(Error::InvalidParameter {
                field: "path",
                reason: "Brownian drivers must start at 0".into(),
            });
        }
        let p = model.params();
        let (g, gb) = (model.gamma(), model.gamma_bar());
        let s = (0..grid.len())
            .map(|i| p.s0 + p.mu * grid.t(i) + p.sigma * (g * wprime[i] + gb * w[i]))
            .collect();
        Ok(Self { grid, w, wprime, s })
    }

    pub fn grid(&self) -> &SimGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> &Arc<SimGrid> {
        &self.grid
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn wprime(&self) -> &[f64] {
        &self.wprime
    }

    pub fn prices(&self) -> &[f64] {
        &self.s
    }

    /// The same drivers observed on a coarser grid whose nodes are all nodes
    /// of this one.
    pub fn restrict(&self, model: &ValidatedModel, coarse: Arc<SimGrid>) -> Result<Self> {
        let mut w = Vec::with_capacity(coarse.len());
        let mut wp = Vec::with_capacity(coarse.len());
        for &t in coarse.times() {
            let j = self.grid.index_of(t).ok_or(Error::InvalidParameter {
                field: "grid",
                reason: format!("coarse node {t} is not a node of the fine grid"),
            })?;
            w.push(self.w[j]);
            wp.push(self.wprime[j]);
        }
        Self::from_drivers(model, coarse, w, wp)
    }
}

/// Generator of scenario `path_index` of the stream identified by `seed`.
pub(crate) fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Samples one scenario on `grid` with exact Gaussian increments.
pub fn simulate_on_grid(
    model: &ValidatedModel,
    grid: &Arc<SimGrid>,
    seed: u64,
    path_index: u64,
) -> PathBundle {
    let mut rng = path_rng(seed, path_index);
    let n = grid.len();
    let mut w = Vec::with_capacity(n);
    let mut wp = Vec::with_capacity(n);
    w.push(0.0);
    wp.push(0.0);
    for i in 0..n - 1 {
        let sd = grid.dt(i).sqrt();
        let dwp: f64 = rng.sample(StandardNormal);
        let dw: f64 = rng.sample(StandardNormal);
        wp.push(wp[i] + sd * dwp);
        w.push(w[i] + sd * dw);
    }
    PathBundle::from_drivers(model, Arc::clone(grid), w, wp)
        .expect("sampled drivers have grid length and start at zero")
}

/// Samples scenario `path_index` on the grid built from `ts` and `n_steps`.
pub fn simulate_paths(
    model: &ValidatedModel,
    ts: &TimeShift,
    n_steps: usize,
    seed: u64,
    path_index: u64,
) -> Result<PathBundle> {
    let grid = Arc::new(SimGrid::new(ts, n_steps)?);
    Ok(simulate_on_grid(model, &grid, seed, path_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn model() -> ValidatedModel {
        ModelParams {
            s0: 2.0,
            mu: 0.3,
            sigma: 1.5,
            gamma: 0.6,
            lambda_impact: 1.0,
            alpha: 1.0,
            horizon_t: 1.0,
            phi0: 0.0,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn deterministic_per_seed_and_index() {
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        let a = simulate_paths(&model(), &ts, 50, 7, 3).unwrap();
        let b = simulate_paths(&model(), &ts, 50, 7, 3).unwrap();
        assert_eq!(a.w(), b.w());
        assert_eq!(a.wprime(), b.wprime());
        assert_eq!(a.prices(), b.prices());
        let c = simulate_paths(&model(), &ts, 50, 7, 4).unwrap();
        assert_ne!(a.w(), c.w());
    }

    #[test]
    fn prices_follow_the_model_exactly() {
        let m = model();
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        let p = simulate_paths(&m, &ts, 40, 1, 0).unwrap();
        for i in 0..p.grid().len() {
            let t = p.grid().t(i);
            let expect = 2.0 + 0.3 * t + 1.5 * (0.6 * p.wprime()[i] + 0.8 * p.w()[i]);
            assert_eq!(p.prices()[i], expect);
        }
        assert_eq!(p.w()[0], 0.0);
        assert_eq!(p.wprime()[0], 0.0);
    }

    #[test]
    fn zero_noise_gives_drift_path() {
        let m = model();
        let ts = TimeShift::identity(1.0).unwrap();
        let grid = Arc::new(SimGrid::new(&ts, 10).unwrap());
        let p = PathBundle::from_drivers(&m, grid.clone(), vec![0.0; 11], vec![0.0; 11]).unwrap();
        for i in 0..11 {
            assert_eq!(p.prices()[i], 2.0 + 0.3 * grid.t(i));
        }
    }

    #[test]
    fn terminal_moments() {
        let m = model();
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        let grid = Arc::new(SimGrid::new(&ts, 4).unwrap());
        let n = 100_000;
        let finals: Vec<f64> = (0..n)
            .map(|k| *simulate_on_grid(&m, &grid, 11, k).prices().last().unwrap())
            .collect();
        let mean = finals.iter().sum::<f64>() / n as f64;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 2.3).abs() <= 4.0 * se, "mean {mean}");
        assert!((var / 2.25 - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn restriction_keeps_driver_values() {
        let m = model();
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        let fine = simulate_paths(&m, &ts, 40, 5, 2).unwrap();
        let coarse = Arc::new(SimGrid::new(&ts, 20).unwrap());
        let r = fine.restrict(&m, coarse).unwrap();
        for i in 0..21 {
            assert_eq!(r.w()[i], fine.w()[2 * i]);
            assert_eq!(r.prices()[i], fine.prices()[2 * i]);
        }
    }
}
