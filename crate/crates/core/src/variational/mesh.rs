/// Piecewise-linear mesh on `[start, end]` split at a junction into a
/// window `[start, junction]` and a tail `[junction, end]`.
///
/// Unknowns are the values of a "tilde" function on every node but the
/// last, and of a "main" function on the tail nodes but the last; both
/// vanish at `end`. They are interleaved node by node, so the quadratic
/// forms are banded except for the main value at the junction, which the
/// window couples to every window unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    n_window: usize,
    tilde: Vec<usize>,
    main: Vec<Option<usize>>,
    dim: usize,
}

impl Mesh {
    /// Mesh with `m` elements, distributed between window and tail in
    /// proportion to their lengths (at least one each when both are
    /// nonempty).
    pub fn split(start: f64, junction: f64, end: f64, m: usize) -> Self {
        let d = junction - start;
        let r = end - junction;
        let n1 = if r <= 0.0 {
            m
        } else if d <= 0.0 {
            0
        } else {
            ((m as f64 * d / (end - start)).round() as usize).clamp(1, m - 1)
        };
        let mut nodes = Vec::with_capacity(m + 1);
        for j in 0..=n1 {
            nodes.push(if j == n1 { junction } else { start + d * j as f64 / n1 as f64 });
        }
        let n2 = m - n1;
        for j in 1..=n2 {
            nodes.push(if j == n2 { end } else { junction + r * j as f64 / n2 as f64 });
        }
        let has_tail = n2 > 0;
        let mut tilde = Vec::with_capacity(m);
        let mut main = vec![None; m + 1];
        let mut next = 0;
        for (j, slot) in main.iter_mut().enumerate().take(m) {
            tilde.push(next);
            next += 1;
            if has_tail && j >= n1 {
                *slot = Some(next);
                next += 1;
            }
        }
        Self {
            nodes,
            n_window: n1,
            tilde,
            main,
            dim: next,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of elements.
    pub fn m(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of window elements; the junction is node `n_window`.
    pub fn n_window(&self) -> usize {
        self.n_window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unknown holding the tilde value at node `j`, `None` at the last node.
    pub fn tilde(&self, j: usize) -> Option<usize> {
        self.tilde.get(j).copied()
    }

    /// Unknown holding the main value at node `j`, `None` off the tail and
    /// at the last node.
    pub fn main(&self, j: usize) -> Option<usize> {
        self.main[j]
    }

    /// The densely coupled unknown: main value at the junction, when there
    /// is both a window and a tail.
    pub fn border(&self) -> Option<usize> {
        if self.n_window > 0 {
            self.main[self.n_window]
        } else {
            None
        }
    }

    /// Tilde values on all nodes.
    pub fn tilde_values(&self, x: &[f64]) -> Vec<f64> {
        (0..=self.m()).map(|j| self.tilde(j).map_or(0.0, |i| x[i])).collect()
    }

    /// Main values on the tail nodes `n_window..=m`.
    pub fn main_values(&self, x: &[f64]) -> Vec<f64> {
        (self.n_window..=self.m())
            .map(|j| self.main(j).map_or(0.0, |i| x[i]))
            .collect()
    }
}
