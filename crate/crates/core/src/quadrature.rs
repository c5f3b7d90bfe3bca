//! Composite Gauss-Legendre quadrature on user-supplied panels.

use crate::error::{Error, Result};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `order` nodes, computed by Newton iteration on the
    /// Legendre polynomial.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over `[a, b]` with a single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate_panels`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub order: usize,
    pub rel_tol: f64,
    pub max_level: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            order: 10,
            rel_tol: 1e-10,
            max_level: 12,
        }
    }
}

/// Integrates `f` over `[edges[0], edges[last]]`, applying the rule on every
/// panel between consecutive edges. All panels are halved together until
/// the total changes by less than `rel_tol` relative.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    edges: &[f64],
    opts: QuadratureOptions,
) -> Result<f64> {
    if edges.len() < 2 {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(opts.order);
    let at_level = |level: u32| -> f64 {
        let pieces = 1usize << level;
        let mut total = 0.0;
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let h = (b - a) / pieces as f64;
            for k in 0..pieces {
                let lo = a + k as f64 * h;
                let hi = if k + 1 == pieces { b } else { lo + h };
                total += rule.integrate(&f, lo, hi);
            }
        }
        total
    };
    let mut prev = at_level(0);
    let mut last_change = f64::INFINITY;
    for level in 1..=opts.max_level {
        let next = at_level(level);
        last_change = (next - prev).abs();
        if !next.is_finite() {
            break;
        }
        if last_change <= opts.rel_tol * next.abs() || (next == 0.0 && prev == 0.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureFailure {
        tol: opts.rel_tol,
        max_level: opts.max_level,
        last_change,
    })
}
