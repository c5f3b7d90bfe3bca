use std::sync::Arc;

use rayon::prelude::*;

use super::execute::terminal_wealth;
use super::grid::SimGrid;
use super::paths::simulate_on_grid;
use super::strategy::Strategy;
use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            n_paths: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// Utilities `-exp(-alpha V_T)` of several strategies on the same scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct McSamples {
    /// `utilities[r][p]`: strategy `r` on path `p`.
    pub utilities: Vec<Vec<f64>>,
}

impl McSamples {
    pub fn estimate(&self, r: usize) -> McEstimate {
        McEstimate::from_samples(&self.utilities[r])
    }

    /// Mean and standard error of `utility(a) - utility(b)` pathwise.
    pub fn paired_difference(&self, a: usize, b: usize) -> McEstimate {
        let d: Vec<f64> = self.utilities[a]
            .iter()
            .zip(&self.utilities[b])
            .map(|(x, y)| x - y)
            .collect();
        McEstimate::from_samples(&d)
    }
}

/// `log(mean(x) / mean(y))` with a delta-method standard error for paired
/// samples.
pub fn log_ratio(x: &[f64], y: &[f64]) -> McEstimate {
    let (mx, my) = (McEstimate::from_samples(x).mean, McEstimate::from_samples(y).mean);
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a / mx - b / my).collect();
    let se = McEstimate::from_samples(&z).std_error;
    McEstimate {
        mean: (mx / my).ln(),
        std_error: se,
        n_paths: x.len(),
    }
}

const CHUNK: usize = 512;

/// Runs every strategy on the same `n_paths` scenarios. Results depend only
/// on the configuration, never on the number of worker threads.
pub fn mc_utilities(
    model: &ValidatedModel,
    ts: &TimeShift,
    strategies: &[&dyn Strategy],
    phi0: f64,
    cfg: McConfig,
) -> Result<McSamples> {
    if cfg.n_paths < 2 {
        return Err(Error::InvalidParameter {
            field: "n_paths",
            reason: "must be >= 2".into(),
        });
    }
    let grid = Arc::new(SimGrid::new(ts, cfg.n_steps)?);
    let alpha = model.params().alpha;
    let n_rules = strategies.len();
    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(cfg.n_paths);
            let mut out = Vec::with_capacity((hi - lo) * n_rules);
            for p in lo..hi {
                let path = simulate_on_grid(model, &grid, cfg.seed, p as u64);
                for s in strategies {
                    let v = terminal_wealth(model, &path, *s, phi0)?;
                    out.push(-(-alpha * v).exp());
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut utilities = vec![Vec::with_capacity(cfg.n_paths); n_rules];
    for chunk in &chunks {
        for row in chunk.chunks_exact(n_rules) {
            for (r, &u) in row.iter().enumerate() {
                utilities[r].push(u);
            }
        }
    }
    Ok(McSamples { utilities })
}

/// Monte Carlo estimate of `E[-exp(-alpha V_T)]` for one strategy.
pub fn mc_expected_utility(
    model: &ValidatedModel,
    ts: &TimeShift,
    strategy: &dyn Strategy,
    phi0: f64,
    cfg: McConfig,
) -> Result<McEstimate> {
    Ok(mc_utilities(model, ts, &[strategy], phi0, cfg)?.estimate(0))
}
