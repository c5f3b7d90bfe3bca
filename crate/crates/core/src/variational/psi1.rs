//! Initial-position part of the dual functional.
//!
//! Given the observed signal `w` on `[0, tau0]`, `tau0 = tau(0)`, the
//! functional of `(h, h_tilde)` with `h(T) = h_tilde(T) = 0` is
//!
//! ```text
//! phi0 (gamma w(tau0) + gamma h(tau0) + gamma_bar h_tilde(0))
//!   + 1/2 int_{tau0}^T (h'^2 + h_tilde'^2) + 1/2 int_0^{tau0} h_tilde'^2
//!   + rho/2 int_0^{tau0} (gamma (w(tau0) - w(t)) + gamma h(tau0) + gamma_bar h_tilde)^2
//!   + rho/2 int_{tau0}^T (gamma h + gamma_bar h_tilde)^2
//! ```

use super::functional::{DiscreteFunctional, VariationalResult};
use super::mesh::Mesh;
use super::psi2::assemble_window_problem;
use crate::closed_form::upsilon;
use crate::error::{Error, Result};
use crate::model::{TimeShift, ValidatedModel};
use crate::quadrature::GaussLegendre;

/// Piecewise-linear signal path on `[0, tau(0)]`, starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSegment {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SignalSegment {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.is_empty() {
            return Ok(Self::empty());
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::InvalidParameter {
                field: "signal_segment",
                reason: "must start at (0, 0)".into(),
            });
        }
        if times.windows(2).any(|p| !(p[1] > p[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "signal_segment",
                reason: "times must increase strictly and values be finite".into(),
            });
        }
        Ok(Self { times, values })
    }

    /// The segment for `tau(0) = 0`.
    pub fn empty() -> Self {
        Self {
            times: vec![0.0],
            values: vec![0.0],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn end_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Linear interpolation, clamped to the segment.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 || t <= 0.0 {
            return self.values[0];
        }
        if t >= self.end_time() {
            return self.end_value();
        }
        let k = self.times.partition_point(|&x| x <= t).clamp(1, n - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

fn tau0_of(model: &ValidatedModel, ts: &TimeShift, w: &SignalSegment) -> Result<f64> {
    let horizon = model.horizon();
    if ts.horizon() != horizon {
        return Err(Error::InvalidParameter {
            field: "time_shift",
            reason: "time shift horizon differs from model horizon".into(),
        });
    }
    let tau0 = ts.eval(0.0)?;
    if (w.end_time() - tau0).abs() > 1e-12 * horizon {
        return Err(Error::InvalidParameter {
            field: "signal_segment",
            reason: format!("must end at tau(0) = {tau0}, ends at {}", w.end_time()),
        });
    }
    Ok(tau0)
}

/// Finite element form with `m_nodes` elements on `[0, T]`.
pub fn psi1_discretize(
    model: &ValidatedModel,
    ts: &TimeShift,
    w: &SignalSegment,
    phi0: f64,
    m_nodes: usize,
) -> Result<DiscreteFunctional> {
    if m_nodes < 8 {
        return Err(Error::InvalidParameter {
            field: "m_nodes",
            reason: format!("must be >= 8, got {m_nodes}"),
        });
    }
    let tau0 = tau0_of(model, ts, w)?;
    let (g, gb) = (model.gamma(), model.gamma_bar());
    let mesh = Mesh::split(0.0, tau0, model.horizon(), m_nodes);
    let w_end = w.end_value();
    let forcing: Vec<f64> = mesh.nodes()[..=mesh.n_window()]
        .iter()
        .map(|&t| g * (w_end - w.eval(t)))
        .collect();
    let mut asm = assemble_window_problem(model, &mesh, &forcing);
    asm.add_linear(mesh.main(mesh.n_window()), phi0 * g);
    asm.add_linear(mesh.tilde(0), phi0 * gb);
    asm.add_constant(phi0 * g * w_end);
    Ok(asm.finish(Some(mesh)))
}

/// Minimum for `tau(0) = 0`: `-tanh(sqrt(rho) T) phi0^2 / (2 sqrt(rho))`.
pub fn psi1_closed_min_value(model: &ValidatedModel, ts: &TimeShift, phi0: f64) -> Result<f64> {
    let tau0 = ts.eval(0.0)?;
    if tau0 > 0.0 {
        return Err(Error::NotApplicable(format!(
            "closed-form initial-position minimum needs tau(0) = 0, got {tau0}"
        )));
    }
    let k = model.sqrt_rho();
    Ok(-(k * model.horizon()).tanh() * phi0 * phi0 / (2.0 * k))
}

/// Kernels read off a discrete minimizer: `a(s) = -sqrt(tau'(s)) h'(tau(s))`
/// on the tail elements, cut where the slope of `tau` changes and mapped
/// back through `tau^{-1}`, and
/// `a_tilde(t) = -h_tilde'(t)` on every element.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernels {
    pub a_times: Vec<f64>,
    pub a: Vec<f64>,
    /// `sqrt(tau'(s)) ds` for each piece of a tail element.
    pub a_weights: Vec<f64>,
    pub a_tilde_times: Vec<f64>,
    pub a_tilde: Vec<f64>,
    pub a_tilde_widths: Vec<f64>,
}

pub fn recover_kernels(result: &VariationalResult, ts: &TimeShift) -> Result<Kernels> {
    let mesh = result.mesh.as_ref().ok_or_else(|| Error::InvalidParameter {
        field: "result",
        reason: "minimizer carries no mesh".into(),
    })?;
    if result.minimizer.len() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            got: result.minimizer.len(),
        });
    }
    let x = &result.minimizer;
    let nodes = mesh.nodes();
    let tilde = mesh.tilde_values(x);
    let main = mesh.main_values(x);
    let n1 = mesh.n_window();
    let mut k = Kernels {
        a_times: Vec::new(),
        a: Vec::new(),
        a_weights: Vec::new(),
        a_tilde_times: Vec::new(),
        a_tilde: Vec::new(),
        a_tilde_widths: Vec::new(),
    };
    for j in 0..mesh.m() {
        let h = nodes[j + 1] - nodes[j];
        k.a_tilde_times.push(0.5 * (nodes[j] + nodes[j + 1]));
        k.a_tilde.push(-(tilde[j + 1] - tilde[j]) / h);
        k.a_tilde_widths.push(h);
        if j >= n1 {
            // split at the values of tau's breakpoints so the slope is
            // constant on each piece; flat pieces of tau carry no weight
            let dh = (main[j + 1 - n1] - main[j - n1]) / h;
            let mut cuts = vec![nodes[j]];
            cuts.extend(
                ts.breakpoint_values()
                    .iter()
                    .copied()
                    .filter(|&v| v > nodes[j] && v < nodes[j + 1]),
            );
            cuts.push(nodes[j + 1]);
            cuts.dedup();
            for p in cuts.windows(2) {
                let s = ts.inverse(0.5 * (p[0] + p[1]))?;
                let root = ts.slope(s)?.sqrt();
                k.a_times.push(s);
                k.a.push(-root * dh);
                // ds = du / tau'
                k.a_weights.push((p[1] - p[0]) / root);
            }
        }
    }
    Ok(k)
}

/// Both sides of the relation tying the optimal initial-position kernels to
/// the baseline projection at time zero:
///
/// ```text
/// gamma w(tau0) + gamma int a(s) sqrt(tau'(s)) ds + gamma_bar int a_tilde
///   = S_bar_0 - S_0 - Upsilon_0'(tau0) / (rho Upsilon_0(tau0)) phi0
/// ```
///
/// with `S_bar_0 = [int_0^{tau0} gamma w(h) Upsilon_0'(tau0 - h) dh
/// + gamma_bar gamma w(tau0)] / Upsilon_0(tau0)`. Baseline models only.
pub fn kernel_relation_sides(
    result: &VariationalResult,
    model: &ValidatedModel,
    ts: &TimeShift,
    w: &SignalSegment,
    phi0: f64,
) -> Result<(f64, f64)> {
    if !model.is_baseline() {
        return Err(Error::NotApplicable("kernel relation is stated for the baseline model".into()));
    }
    let tau0 = tau0_of(model, ts, w)?;
    let (g, gb, rho) = (model.gamma(), model.gamma_bar(), model.rho());
    let kern = recover_kernels(result, ts)?;
    let w_end = w.end_value();
    let lhs = g * w_end
        + g * kern.a.iter().zip(&kern.a_weights).map(|(a, d)| a * d).sum::<f64>()
        + gb * kern.a_tilde.iter().zip(&kern.a_tilde_widths).map(|(a, d)| a * d).sum::<f64>();

    let full = upsilon(model, tau0, tau0)?;
    let gl = GaussLegendre::new(10);
    let mut conv = 0.0;
    for p in w.times().windows(2) {
        conv += gl.integrate(
            |h| g * w.eval(h) * upsilon(model, tau0, tau0 - h).map_or(f64::NAN, |u| u.derivative),
            p[0],
            p[1],
        );
    }
    let s_bar = (conv + gb * g * w_end) / full.value;
    // baseline prices start at zero
    let rhs = s_bar - full.derivative / (rho * full.value) * phi0;
    Ok((lhs, rhs))
}

/// `|lhs - rhs|` of [`kernel_relation_sides`].
pub fn check_kernel_relation(
    result: &VariationalResult,
    model: &ValidatedModel,
    ts: &TimeShift,
    w: &SignalSegment,
    phi0: f64,
) -> Result<f64> {
    let (lhs, rhs) = kernel_relation_sides(result, model, ts, w, phi0)?;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::variational::functional::minimize;
    use approx::assert_relative_eq;

    fn model() -> ValidatedModel {
        ModelParams::baseline(0.6, 1.0, 1.0, 0.5).validate().unwrap()
    }

    fn fixture() -> (TimeShift, SignalSegment) {
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        let vals = vec![0.0, 0.12, 0.05, -0.08, 0.02, 0.15, 0.11, 0.2, 0.18];
        let times = (0..9).map(|i| 0.25 * i as f64 / 8.0).collect();
        (ts, SignalSegment::new(times, vals).unwrap())
    }

    #[test]
    fn segment_validation() {
        assert!(SignalSegment::new(vec![0.0, 0.1], vec![0.1, 0.0]).is_err());
        assert!(SignalSegment::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(SignalSegment::new(vec![0.0], vec![0.0, 1.0]).is_err());
        let w = SignalSegment::new(vec![0.0, 0.1, 0.2], vec![0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(w.eval(0.05), 0.5);
        assert_relative_eq!(w.eval(0.15), 0.5);
        assert_eq!(w.eval(0.3), 0.0);
        let (ts, _) = fixture();
        assert!(psi1_discretize(&model(), &ts, &w, 0.5, 64).is_err());
    }

    #[test]
    fn identity_shift_closed_minimum() {
        let m = model();
        let ts = TimeShift::identity(1.0).unwrap();
        let exact = psi1_closed_min_value(&m, &ts, 0.5).unwrap();
        assert_relative_eq!(exact, -(1.0f64).tanh() * 0.25 / 2.0, max_relative = 1e-15);
        let df = psi1_discretize(&m, &ts, &SignalSegment::empty(), 0.5, 400).unwrap();
        let r = minimize(&df, 1e-10).unwrap();
        assert!(r.min_value >= exact);
        assert_relative_eq!(r.min_value, exact, max_relative = 1e-4);
        let (ts2, _) = fixture();
        assert!(matches!(psi1_closed_min_value(&m, &ts2, 0.5), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn lookahead_minimum_and_relation() {
        let m = model();
        let (ts, w) = fixture();
        let df = psi1_discretize(&m, &ts, &w, 0.5, 1600).unwrap();
        let r = minimize(&df, 1e-10).unwrap();
        assert_relative_eq!(r.min_value, -0.035_686_730_151_403, max_relative = 1e-5);
        let (lhs, rhs) = kernel_relation_sides(&r, &m, &ts, &w, 0.5).unwrap();
        assert_relative_eq!(rhs, -0.244_038_374_321_007, max_relative = 1e-12);
        assert!((lhs - rhs).abs() < 1e-5, "{lhs} vs {rhs}");
    }

    #[test]
    fn relation_with_empty_window() {
        let m = model();
        let ts = TimeShift::identity(1.0).unwrap();
        let w = SignalSegment::empty();
        let r = minimize(&psi1_discretize(&m, &ts, &w, 0.5, 800).unwrap(), 1e-10).unwrap();
        let (lhs, rhs) = kernel_relation_sides(&r, &m, &ts, &w, 0.5).unwrap();
        let expect = -0.5 * (1.0f64).tanh();
        assert_relative_eq!(rhs, expect, max_relative = 1e-14);
        assert_relative_eq!(lhs, expect, max_relative = 1e-5);
    }

    #[test]
    fn zero_inputs_vanish() {
        let m = model();
        let ts = TimeShift::identity(1.0).unwrap();
        let w = SignalSegment::empty();
        let r = minimize(&psi1_discretize(&m, &ts, &w, 0.0, 64).unwrap(), 1e-10).unwrap();
        assert!(r.minimizer.iter().all(|&x| x == 0.0));
        assert_eq!(r.min_value, 0.0);
        assert_eq!(check_kernel_relation(&r, &m, &ts, &w, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn relation_telescopes() {
        let m = model();
        let (ts, w) = fixture();
        let df = psi1_discretize(&m, &ts, &w, 0.5, 200).unwrap();
        let r = minimize(&df, 1e-10).unwrap();
        let mesh = r.mesh.as_ref().unwrap();
        let tilde = mesh.tilde_values(&r.minimizer);
        let main = mesh.main_values(&r.minimizer);
        let (lhs, _) = kernel_relation_sides(&r, &m, &ts, &w, 0.5).unwrap();
        let direct = 0.6 * (w.end_value() + main[0]) + 0.8 * tilde[0];
        assert_relative_eq!(lhs, direct, max_relative = 1e-12);
    }

    #[test]
    fn relation_with_flat_shift() {
        let m = ModelParams::baseline(0.5, 0.5, 2.0, 0.8).validate().unwrap();
        let ts = TimeShift::new(&[(0.0, 0.2), (0.5, 1.0), (1.0, 1.0), (1.6, 2.0), (2.0, 2.0)], 2.0).unwrap();
        let w = SignalSegment::new(vec![0.0, 0.1, 0.2], vec![0.0, -0.1, 0.05]).unwrap();
        let r = minimize(&psi1_discretize(&m, &ts, &w, 0.8, 1000).unwrap(), 1e-10).unwrap();
        assert!(check_kernel_relation(&r, &m, &ts, &w, 0.8).unwrap() < 1e-5);
    }

    #[test]
    fn relation_needs_baseline() {
        let m = ModelParams {
            mu: 0.1,
            ..ModelParams::baseline(0.6, 1.0, 1.0, 0.5)
        }
        .validate()
        .unwrap();
        let (ts, w) = fixture();
        let r = minimize(&psi1_discretize(&m, &ts, &w, 0.5, 64).unwrap(), 1e-10).unwrap();
        assert!(matches!(
            check_kernel_relation(&r, &m, &ts, &w, 0.5),
            Err(Error::NotApplicable(_))
        ));
    }
}
