use clap::ValueEnum;
use peeklab_core::closed_form::{certainty_equivalent, optimal_value, signal_integral, value_components};
use peeklab_core::sim::{mc_utilities, McConfig, MertonChase, OptimalStrategy, Strategy, ZeroStrategy};
use peeklab_core::variational::{
    dual_value, kernel_relation_sides, minimize, psi1_closed_min_value, psi1_discretize, psi2_closed,
    psi2_discretize,
};
use peeklab_core::Error;

use crate::config::Resolved;
use crate::error::CliError;

const SOLVER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Value,
    Simulate,
    CertaintyEquivalent,
    VariationalCheck,
    DualCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Value => "value",
            Command::Simulate => "simulate",
            Command::CertaintyEquivalent => "certainty-equivalent",
            Command::VariationalCheck => "variational-check",
            Command::DualCheck => "dual-check",
        }
    }

    /// Columns after the common `experiment,config_hash,seed` prefix.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Command::Value => &[
                "position_term",
                "drift_term",
                "signal_integral",
                "exponent",
                "value",
                "certainty_equivalent",
            ],
            Command::Simulate => &["strategy", "n_paths", "n_steps", "mean", "std_error", "closed_form"],
            Command::CertaintyEquivalent => &["gamma", "certainty_equivalent", "signal_integral"],
            Command::VariationalCheck => &["check", "s", "reference", "computed", "abs_error", "rel_error"],
            Command::DualCheck => &[
                "dual_value",
                "utility_factor",
                "primal_from_dual",
                "optimal_value",
                "difference",
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
        }
    }
}

/// Rows of one command plus the threshold breaches found while computing
/// them.
#[derive(Debug, Default)]
pub struct Outcome {
    pub rows: Vec<Vec<Cell>>,
    pub breaches: Vec<String>,
}

pub fn run(cmd: Command, r: &Resolved) -> Result<Outcome, CliError> {
    let out = match cmd {
        Command::Value => value(r)?,
        Command::Simulate => simulate(r)?,
        Command::CertaintyEquivalent => certainty(r)?,
        Command::VariationalCheck => variational(r)?,
        Command::DualCheck => dual(r)?,
    };
    for row in &out.rows {
        if row.iter().any(|c| matches!(c, Cell::Float(x) if !x.is_finite())) {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::NAN,
            }
            .into());
        }
    }
    Ok(out)
}

fn value(r: &Resolved) -> Result<Outcome, CliError> {
    let v = value_components(&r.model, &r.time_shift)?;
    let c = certainty_equivalent(&r.model, &r.time_shift)?;
    let mut out = Outcome::default();
    out.rows.push(
        [v.position_term, v.drift_term, v.signal_integral, v.exponent, v.value, c]
            .map(Cell::Float)
            .to_vec(),
    );
    Ok(out)
}

fn simulate(r: &Resolved) -> Result<Outcome, CliError> {
    let e = &r.config.experiment;
    let cfg = McConfig {
        n_paths: e.n_paths,
        n_steps: e.n_steps,
        seed: r.seed,
    };
    let optimal = OptimalStrategy::new(&r.model);
    let merton = MertonChase::new(&r.model);
    let rules: [(&str, &dyn Strategy); 3] = [("optimal", &optimal), ("zero", &ZeroStrategy), ("merton_chase", &merton)];
    let refs: Vec<&dyn Strategy> = rules.iter().map(|(_, s)| *s).collect();
    let samples = mc_utilities(&r.model, &r.time_shift, &refs, r.model.phi0(), cfg)?;
    let target = optimal_value(&r.model, &r.time_shift)?;
    let mut out = Outcome::default();
    for (i, (name, _)) in rules.iter().enumerate() {
        let est = samples.estimate(i);
        out.rows.push(vec![
            Cell::Text(name.to_string()),
            Cell::Int(e.n_paths as u64),
            Cell::Int(e.n_steps as u64),
            Cell::Float(est.mean),
            Cell::Float(est.std_error),
            Cell::Float(target),
        ]);
        if i == 0 && (est.mean - target).abs() > 3.0 * est.std_error {
            out.breaches.push(format!(
                "optimal strategy mean {} differs from closed form {target} by more than 3 standard errors ({})",
                est.mean, est.std_error
            ));
        }
    }
    Ok(out)
}

fn certainty(r: &Resolved) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mut points = Vec::new();
    for &g in &r.config.experiment.gammas {
        let m = r.model.with_gamma(g)?;
        let c = certainty_equivalent(&m, &r.time_shift)?;
        out.rows.push(vec![
            Cell::Float(g),
            Cell::Float(c),
            Cell::Float(signal_integral(&m, &r.time_shift)?),
        ]);
        if g == 0.0 && c != 0.0 {
            out.breaches.push(format!("c(0) = {c}, expected 0"));
        }
        points.push((g, c));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    for p in points.windows(2) {
        if p[1].1 < p[0].1 {
            out.breaches.push(format!("c decreases between gamma {} and {}", p[0].0, p[1].0));
        }
    }
    Ok(out)
}

fn check_row(check: &str, s: f64, reference: f64, computed: f64) -> (Vec<Cell>, f64, f64) {
    let abs = (computed - reference).abs();
    let rel = if reference != 0.0 { abs / reference.abs() } else { abs };
    (
        vec![
            Cell::Text(check.into()),
            Cell::Float(s),
            Cell::Float(reference),
            Cell::Float(computed),
            Cell::Float(abs),
            Cell::Float(rel),
        ],
        abs,
        rel,
    )
}

/// The dual functionals live in the baseline model, so general models are
/// reduced first.
fn variational(r: &Resolved) -> Result<Outcome, CliError> {
    let e = &r.config.experiment;
    let red = r.model.to_baseline();
    let (m, ts, phi0) = (&red.baseline, &r.time_shift, red.phi0_baseline);
    let mut out = Outcome::default();
    let end = ts.inverse_horizon();
    for i in 0..e.s_points {
        let s = end * (i as f64 + 0.5) / e.s_points as f64;
        let closed = match psi2_closed(m, ts, s) {
            Ok(c) => c,
            Err(Error::DegenerateShift { .. }) => continue,
            Err(err) => return Err(err.into()),
        };
        let discrete = minimize(&psi2_discretize(m, ts, s, e.m_nodes)?, SOLVER_TOL)?;
        let (row, _, rel) = check_row("psi2", s, closed.min_value, discrete.min_value);
        out.rows.push(row);
        if rel > 0.01 {
            out.breaches.push(format!("per-s minimum at s = {s}: relative error {rel:e} > 1e-2"));
        }
    }
    let w = r.signal_segment()?;
    let result = minimize(&psi1_discretize(m, ts, &w, phi0, e.m_nodes)?, SOLVER_TOL)?;
    match psi1_closed_min_value(m, ts, phi0) {
        Ok(closed) => {
            let (row, _, rel) = check_row("psi1", 0.0, closed, result.min_value);
            out.rows.push(row);
            if rel > 0.005 {
                out.breaches.push(format!("initial-position minimum: relative error {rel:e} > 5e-3"));
            }
        }
        Err(Error::NotApplicable(_)) => {}
        Err(err) => return Err(err.into()),
    }
    let (lhs, rhs) = kernel_relation_sides(&result, m, ts, &w, phi0)?;
    let (row, abs, _) = check_row("kernel_relation", 0.0, rhs, lhs);
    out.rows.push(row);
    if abs > 1e-3 {
        out.breaches.push(format!("kernel relation residual {abs:e} > 1e-3"));
    }
    Ok(out)
}

fn dual(r: &Resolved) -> Result<Outcome, CliError> {
    let red = r.model.to_baseline();
    let d = dual_value(&red.baseline, &r.time_shift, red.phi0_baseline)?;
    let primal = red.utility_factor * -(-d).exp();
    let v = optimal_value(&r.model, &r.time_shift)?;
    let diff = primal - v;
    let mut out = Outcome::default();
    out.rows
        .push([d, red.utility_factor, primal, v, diff].map(Cell::Float).to_vec());
    if diff.abs() > 1e-12 * v.abs().max(1.0) {
        out.breaches.push(format!("duality gap {diff:e} exceeds 1e-12"));
    }
    Ok(out)
}
