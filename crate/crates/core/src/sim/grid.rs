use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::model::TimeShift;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Simulation time grid with the signal window edge of every node.
///
/// `edge(i)` is the last node not beyond `tau(t_i)`. When `tau(t_i)` is not
/// itself a node the window is cut at the node below it, so strategies never
/// see more than they are entitled to.
#[derive(Debug, Clone)]
pub struct SimGrid {
    id: u64,
    times: Vec<f64>,
    tau: Vec<f64>,
    edge: Vec<usize>,
}

impl PartialEq for SimGrid {
    fn eq(&self, other: &Self) -> bool {
        self.times == other.times && self.edge == other.edge
    }
}

impl SimGrid {
    /// Uniform grid with `n_steps` steps merged with the breakpoint times and
    /// values of `ts`.
    pub fn new(ts: &TimeShift, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter {
                field: "n_steps",
                reason: "must be >= 1".into(),
            });
        }
        let horizon = ts.horizon();
        let tol = 1e-9 * horizon;
        let mut times: Vec<f64> = (0..=n_steps)
            .map(|i| horizon * i as f64 / n_steps as f64)
            .collect();
        times[n_steps] = horizon;
        for &x in ts.breakpoint_times().iter().chain(ts.breakpoint_values()) {
            let k = times.partition_point(|&t| t < x);
            let near = [k.checked_sub(1), Some(k)]
                .into_iter()
                .flatten()
                .filter(|&j| j < times.len())
                .find(|&j| (times[j] - x).abs() <= tol);
            match near {
                Some(j) => times[j] = x,
                None => times.insert(k, x),
            }
        }
        Self::from_times(ts, times)
    }

    /// Grid from explicit node times, which must increase strictly from `0`
    /// to the horizon of `ts`.
    pub fn from_times(ts: &TimeShift, times: Vec<f64>) -> Result<Self> {
        let horizon = ts.horizon();
        let bad = |reason: String| Error::InvalidParameter {
            field: "grid",
            reason,
        };
        if times.len() < 2 || times[0] != 0.0 || *times.last().unwrap() != horizon {
            return Err(bad("grid must run from 0 to the horizon".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("grid times must increase strictly".into()));
        }
        let slack = 1e-12 * horizon;
        let tau: Vec<f64> = times.iter().map(|&t| ts.eval_unchecked(t)).collect();
        let edge = tau
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let j = times.partition_point(|&t| t <= u + slack) - 1;
                j.max(i)
            })
            .collect();
        Ok(Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            times,
            tau,
            edge,
        })
    }

    /// Identifier shared by clones, used to cache per-grid tables.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dt(&self, i: usize) -> f64 {
        self.times[i + 1] - self.times[i]
    }

    /// `tau(t_i)`.
    pub fn tau(&self, i: usize) -> f64 {
        self.tau[i]
    }

    /// Index of the last node inside the signal window of node `i`.
    pub fn edge(&self, i: usize) -> usize {
        self.edge[i]
    }

    /// Index of the node at time `t`, if there is one within `1e-12 T`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.horizon();
        let k = self.times.partition_point(|&x| x < t - tol);
        (k < self.times.len() && (self.times[k] - t).abs() <= tol).then_some(k)
    }
}
