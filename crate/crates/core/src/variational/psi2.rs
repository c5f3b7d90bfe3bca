//! Per-`s` problem of the signal part of the dual functional.
//!
//! For fixed `s` with window `D = tau(s) - s` and tail `R = T - tau(s)` the
//! functional of `(g, g_tilde)` with `g(T) = g_tilde(T) = 0` is
//!
//! ```text
//! 1/2 int_s^T g_tilde'^2 + 1/2 int_{tau(s)}^T g'^2
//!   + rho/2 int_s^{tau(s)} (gamma sqrt(tau'(s)) + gamma g(tau(s)) + gamma_bar g_tilde)^2
//!   + rho/2 int_{tau(s)}^T (gamma g + gamma_bar g_tilde)^2
//! ```

use super::functional::{Assembler, DiscreteFunctional, VariationalResult};
use super::mesh::Mesh;
use crate::closed_form::{signal_density, tanhc};
use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};

/// Assembles the quadratic part shared by the per-`s` problem and the
/// initial-position problem: derivative energies, and the penalty with the
/// given forcing on the window nodes `0..=n_window`.
pub(crate) fn assemble_window_problem(model: &ValidatedModel, mesh: &Mesh, forcing: &[f64]) -> Assembler {
    let (g, gb, rho) = (model.gamma(), model.gamma_bar(), model.rho());
    let nodes = mesh.nodes();
    let n1 = mesh.n_window();
    let junction = mesh.main(n1);
    let mut asm = Assembler::new(mesh.dim(), 3, mesh.border());
    for j in 0..mesh.m() {
        let h = nodes[j + 1] - nodes[j];
        let (t0, t1) = (mesh.tilde(j), mesh.tilde(j + 1));
        asm.add_square(0.5 / h, &[(t1, 1.0), (t0, -1.0)], 0.0);
        if j < n1 {
            asm.add_linear_square(
                0.5 * rho,
                h,
                (&[(t0, gb), (junction, g)], forcing[j]),
                (&[(t1, gb), (junction, g)], forcing[j + 1]),
            );
        } else {
            let (m0, m1) = (mesh.main(j), mesh.main(j + 1));
            asm.add_square(0.5 / h, &[(m1, 1.0), (m0, -1.0)], 0.0);
            asm.add_linear_square(0.5 * rho, h, (&[(t0, gb), (m0, g)], 0.0), (&[(t1, gb), (m1, g)], 0.0));
        }
    }
    asm
}

struct PerS {
    tau_s: f64,
    slope: f64,
}

fn check_s(model: &ValidatedModel, ts: &TimeShift, s: f64) -> Result<PerS> {
    let horizon = model.horizon();
    if ts.horizon() != horizon {
        return Err(Error::InvalidParameter {
            field: "time_shift",
            reason: "time shift horizon differs from model horizon".into(),
        });
    }
    let hi = ts.inverse_horizon();
    if !(s >= 0.0 && s < hi) {
        return Err(Error::OutOfDomain {
            what: "s",
            value: s,
            lo: 0.0,
            hi,
        });
    }
    let slope = ts.slope(s)?;
    if slope <= 0.0 {
        return Err(Error::DegenerateShift { s });
    }
    Ok(PerS {
        tau_s: ts.eval(s)?,
        slope,
    })
}

/// Finite element form of the per-`s` functional with `m_nodes` elements
/// on `[s, T]`.
pub fn psi2_discretize(model: &ValidatedModel, ts: &TimeShift, s: f64, m_nodes: usize) -> Result<DiscreteFunctional> {
    if m_nodes < 8 {
        return Err(Error::InvalidParameter {
            field: "m_nodes",
            reason: format!("must be >= 8, got {m_nodes}"),
        });
    }
    let per = check_s(model, ts, s)?;
    let mesh = Mesh::split(s, per.tau_s, model.horizon(), m_nodes);
    let c = model.gamma() * per.slope.sqrt();
    let forcing = vec![c; mesh.n_window() + 1];
    Ok(assemble_window_problem(model, &mesh, &forcing).finish(Some(mesh)))
}

/// Closed-form minimizer of the per-`s` functional.
///
/// On the tail the rotated pair `p = gamma g + gamma_bar g_tilde`,
/// `q = -gamma_bar g + gamma g_tilde` solves `p'' = rho p`, `q'' = 0`; on the
/// window `y = c + gamma g(tau(s)) + gamma_bar g_tilde` solves
/// `y'' = gamma_bar^2 rho y` with `y'(s) = 0`. Only the junction values
/// remain, and they minimize a 2x2 quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi2Closed {
    pub s: f64,
    pub tau_s: f64,
    pub slope: f64,
    /// `g(tau(s))`.
    pub junction_main: f64,
    /// `g_tilde(tau(s))`.
    pub junction_tilde: f64,
    /// The displayed minimum value.
    pub min_value: f64,
    /// The 2x2 quadratic evaluated at its minimizer.
    pub reduced_min_value: f64,
    gamma: f64,
    gamma_bar: f64,
    sqrt_rho: f64,
    horizon: f64,
}

pub fn psi2_closed(model: &ValidatedModel, ts: &TimeShift, s: f64) -> Result<Psi2Closed> {
    let per = check_s(model, ts, s)?;
    let (g, gb, k) = (model.gamma(), model.gamma_bar(), model.sqrt_rho());
    let horizon = model.horizon();
    let d = per.tau_s - s;
    let r = horizon - per.tau_s;
    let c = g * per.slope.sqrt();
    // window cost 1/2 k u y(tau(s))^2 with u = tanh(gamma_bar k D) / gamma_bar
    let u = k * d * tanhc(gb * k * d);
    let (junction_main, junction_tilde, reduced) = if r <= 0.0 {
        (0.0, 0.0, 0.5 * k * u * c * c)
    } else {
        // Hessian (k u + k coth(k R)) v v^T + w w^T / R with v = (g, gb),
        // w = (-gb, g); gradient at zero k u c v.
        let a = k * u + k / (k * r).tanh();
        let h11 = a * g * g + gb * gb / r;
        let h12 = a * g * gb - g * gb / r;
        let h22 = a * gb * gb + g * g / r;
        let (b1, b2) = (k * u * c * g, k * u * c * gb);
        let det = h11 * h22 - h12 * h12;
        let x1 = -(h22 * b1 - h12 * b2) / det;
        let x2 = -(h11 * b2 - h12 * b1) / det;
        let q = 0.5 * (h11 * x1 * x1 + 2.0 * h12 * x1 * x2 + h22 * x2 * x2)
            + b1 * x1
            + b2 * x2
            + 0.5 * k * u * c * c;
        (x1, x2, q)
    };
    let min_value = 0.5 * per.slope * signal_density(g, gb, k, r, d);
    Ok(Psi2Closed {
        s,
        tau_s: per.tau_s,
        slope: per.slope,
        junction_main,
        junction_tilde,
        min_value,
        reduced_min_value: reduced,
        gamma: g,
        gamma_bar: gb,
        sqrt_rho: k,
        horizon,
    })
}

impl Psi2Closed {
    fn rotated_junction(&self) -> (f64, f64) {
        let (g, gb) = (self.gamma, self.gamma_bar);
        (
            g * self.junction_main + gb * self.junction_tilde,
            -gb * self.junction_main + g * self.junction_tilde,
        )
    }

    /// `(g(t), g_tilde(t))` on the tail `[tau(s), T]`.
    pub fn tail_at(&self, t: f64) -> (f64, f64) {
        let r = self.horizon - self.tau_s;
        if r <= 0.0 {
            return (0.0, 0.0);
        }
        let k = self.sqrt_rho;
        let (p0, q0) = self.rotated_junction();
        // sinh(k (T - t)) / sinh(k R) without overflow
        let ratio = (-k * (t - self.tau_s)).exp() * (-(-2.0 * k * (self.horizon - t)).exp_m1())
            / (-(-2.0 * k * r).exp_m1());
        let p = p0 * ratio;
        let q = q0 * (self.horizon - t) / r;
        let (g, gb) = (self.gamma, self.gamma_bar);
        (g * p - gb * q, gb * p + g * q)
    }

    /// `g_tilde(t)` on the window `[s, tau(s)]`.
    pub fn window_at(&self, t: f64) -> f64 {
        let (g, gb) = (self.gamma, self.gamma_bar);
        let beta = gb * self.sqrt_rho;
        let c = g * self.slope.sqrt();
        let y_end = c + g * self.junction_main + gb * self.junction_tilde;
        let d = self.tau_s - self.s;
        let x = t - self.s;
        // cosh(beta x) / cosh(beta D)
        let ratio = (beta * (x - d)).exp() * (1.0 + (-2.0 * beta * x).exp()) / (1.0 + (-2.0 * beta * d).exp());
        (y_end * ratio - c - g * self.junction_main) / gb
    }

    /// The minimizer as an unknown vector on `mesh`.
    pub fn on_mesh(&self, mesh: &Mesh) -> Vec<f64> {
        let mut x = vec![0.0; mesh.dim()];
        for (j, &t) in mesh.nodes().iter().enumerate() {
            let (main, tilde) = if j < mesh.n_window() {
                (0.0, self.window_at(t))
            } else {
                self.tail_at(t)
            };
            if let Some(i) = mesh.tilde(j) {
                x[i] = tilde;
            }
            if let Some(i) = mesh.main(j) {
                x[i] = main;
            }
        }
        x
    }

    pub fn to_result(&self) -> VariationalResult {
        VariationalResult {
            minimizer: Vec::new(),
            min_value: self.min_value,
            reduced_params: vec![
                ("junction_main", self.junction_main),
                ("junction_tilde", self.junction_tilde),
            ],
            residual: 0.0,
            mesh: None,
        }
    }
}

/// Midpoint sum of the closed per-`s` minima over `[0, tau^{-1}(T)]`, flat
/// pieces of `tau` skipped. Equals half the signal integral over
/// `[tau(0), T]` up to the sum's error.
pub fn psi2_sweep_integral(model: &ValidatedModel, ts: &TimeShift, n: usize) -> Result<f64> {
    let hi = ts.inverse_horizon();
    let h = hi / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let s = (i as f64 + 0.5) * h;
        match psi2_closed(model, ts, s) {
            Ok(c) => total += c.min_value * h,
            Err(Error::DegenerateShift { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}
