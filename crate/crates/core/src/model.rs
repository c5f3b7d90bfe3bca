//! Model parameters, the peek-ahead time shift and the baseline reduction.

use crate::error::{Error, Result};

/// Raw market and preference parameters.
///
/// The stock follows `S_t = s0 + mu t + sigma (gamma W'_t + gamma_bar W_t)`;
/// the investor sees `W'` up to `tau(t)` and pays `lambda_impact / 2 * phi`
/// per share when trading at rate `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub lambda_impact: f64,
    pub alpha: f64,
    pub horizon_t: f64,
    pub phi0: f64,
}

impl ModelParams {
    /// Baseline parameters: `s0 = 0`, `mu = 0`, `sigma = 1`, `alpha = 1`.
    pub fn baseline(gamma: f64, lambda_impact: f64, horizon_t: f64, phi0: f64) -> Self {
        Self {
            s0: 0.0,
            mu: 0.0,
            sigma: 1.0,
            gamma,
            lambda_impact,
            alpha: 1.0,
            horizon_t,
            phi0,
        }
    }

    pub fn validate(self) -> Result<ValidatedModel> {
        validate(self)
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

fn require_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn require_positive(field: &'static str, v: f64) -> Result<()> {
    require_finite(field, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be > 0, got {v}")))
    }
}

/// Checks all parameter bounds and populates the derived quantities.
pub fn validate(raw: ModelParams) -> Result<ValidatedModel> {
    require_finite("s0", raw.s0)?;
    require_finite("mu", raw.mu)?;
    require_finite("phi0", raw.phi0)?;
    require_positive("sigma", raw.sigma)?;
    require_positive("lambda_impact", raw.lambda_impact)?;
    require_positive("alpha", raw.alpha)?;
    require_positive("horizon_T", raw.horizon_t)?;
    require_finite("gamma", raw.gamma)?;
    if raw.gamma.abs() >= 1.0 {
        return Err(invalid(
            "gamma",
            format!("must satisfy |gamma| < 1, got {}", raw.gamma),
        ));
    }
    // (1 - g)(1 + g) avoids cancellation for |gamma| close to one.
    let gamma_bar = ((1.0 - raw.gamma) * (1.0 + raw.gamma)).sqrt();
    let rho = raw.alpha * raw.sigma * raw.sigma / raw.lambda_impact;
    Ok(ValidatedModel {
        params: raw,
        rho,
        gamma_bar,
    })
}

/// Parameters that passed validation, with `rho = alpha sigma^2 / Lambda`
/// and `gamma_bar = sqrt(1 - gamma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedModel {
    params: ModelParams,
    rho: f64,
    gamma_bar: f64,
}

impl ValidatedModel {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sqrt_rho(&self) -> f64 {
        self.rho.sqrt()
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn horizon(&self) -> f64 {
        self.params.horizon_t
    }

    pub fn phi0(&self) -> f64 {
        self.params.phi0
    }

    /// `mu / (alpha sigma^2)`.
    pub fn merton_ratio(&self) -> f64 {
        let p = &self.params;
        p.mu / (p.alpha * p.sigma * p.sigma)
    }

    /// True when `s0 = 0`, `mu = 0`, `sigma = 1` and `alpha = 1`.
    pub fn is_baseline(&self) -> bool {
        let p = &self.params;
        p.s0 == 0.0 && p.mu == 0.0 && p.sigma == 1.0 && p.alpha == 1.0
    }

    /// Same model with a different initial position.
    pub fn with_phi0(&self, phi0: f64) -> Result<ValidatedModel> {
        ModelParams { phi0, ..self.params }.validate()
    }

    /// Same model with a different signal correlation.
    pub fn with_gamma(&self, gamma: f64) -> Result<ValidatedModel> {
        ModelParams { gamma, ..self.params }.validate()
    }
}

/// Relative slack used when snapping breakpoints onto `0` and `T`.
const SNAP: f64 = 1e-12;

/// Continuous, nondecreasing, piecewise-linear peek-ahead horizon
/// `tau: [0, T] -> [0, T]` with `tau(t) >= t` and `tau(T) = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeShift {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeShift {
    /// Builds a shift from `(t_k, tau_k)` pairs. Breakpoint times must be
    /// strictly increasing from `0` to `horizon`.
    pub fn new(breakpoints: &[(f64, f64)], horizon: f64) -> Result<Self> {
        let bad = |reason: String| invalid("time_shift", reason);
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(bad(format!("horizon must be positive, got {horizon}")));
        }
        if breakpoints.len() < 2 {
            return Err(bad("at least two breakpoints are required".into()));
        }
        let tol = SNAP * horizon;
        let mut times = Vec::with_capacity(breakpoints.len());
        let mut values = Vec::with_capacity(breakpoints.len());
        for (k, &(t, v)) in breakpoints.iter().enumerate() {
            if !(t.is_finite() && v.is_finite()) {
                return Err(bad(format!("breakpoint {k} is not finite")));
            }
            let t = if (t - horizon).abs() <= tol {
                horizon
            } else if t.abs() <= tol {
                0.0
            } else {
                t
            };
            let v = if (v - horizon).abs() <= tol { horizon } else { v };
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(bad(format!(
                        "breakpoint times must be strictly increasing (t_{k} = {t})"
                    )));
                }
            }
            if let Some(&prev) = values.last() {
                if v < prev {
                    return Err(bad(format!("tau must be nondecreasing (tau_{k} = {v})")));
                }
            }
            if v < t - tol {
                return Err(bad(format!("tau(t) >= t violated at t = {t} (tau = {v})")));
            }
            if v > horizon {
                return Err(bad(format!("tau(t) <= T violated at t = {t} (tau = {v})")));
            }
            times.push(t);
            values.push(v.max(t));
        }
        if times[0] != 0.0 {
            return Err(bad(format!("first breakpoint must be at t = 0, got {}", times[0])));
        }
        if *times.last().unwrap() != horizon {
            return Err(bad("last breakpoint must be at t = T".into()));
        }
        if *values.last().unwrap() != horizon {
            return Err(bad("tau(T) must equal T".into()));
        }
        Ok(Self { times, values })
    }

    pub fn identity(horizon: f64) -> Result<Self> {
        Self::new(&[(0.0, 0.0), (horizon, horizon)], horizon)
    }

    /// `tau(t) = min(t + delta, T)`.
    pub fn constant_lookahead(delta: f64, horizon: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(invalid("delta", format!("must be >= 0, got {delta}")));
        }
        if delta == 0.0 {
            Self::identity(horizon)
        } else if delta >= horizon {
            Self::new(&[(0.0, horizon), (horizon, horizon)], horizon)
        } else {
            Self::new(
                &[(0.0, delta), (horizon - delta, horizon), (horizon, horizon)],
                horizon,
            )
        }
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn breakpoint_times(&self) -> &[f64] {
        &self.times
    }

    pub fn breakpoint_values(&self) -> &[f64] {
        &self.values
    }

    /// Sorted union of breakpoint times and values: every point where
    /// `tau` or its generalized inverse may have a kink or a jump.
    pub fn kinks(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.times.iter().chain(&self.values).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    fn check_domain(&self, what: &'static str, x: f64) -> Result<()> {
        let hi = self.horizon();
        if (0.0..=hi).contains(&x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what,
                value: x,
                lo: 0.0,
                hi,
            })
        }
    }

    /// `tau(t)` for `t` in `[0, T]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain("t", t)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let k = self.segment_of(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let v = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        v.clamp(t.max(v0), v1)
    }

    /// Index `k` with `t` in `[t_k, t_{k+1}]`, preferring the left segment
    /// at interior breakpoints.
    fn segment_of(&self, t: f64) -> usize {
        let n = self.times.len();
        let k = self.times.partition_point(|&x| x < t);
        k.saturating_sub(1).min(n - 2)
    }

    /// Generalized inverse `inf { t >= 0 : tau(t) >= u }`; equals `0` for
    /// `u <= tau(0)`.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        self.check_domain("u", u)?;
        Ok(self.inverse_unchecked(u))
    }

    pub(crate) fn inverse_unchecked(&self, u: f64) -> f64 {
        if u <= self.values[0] {
            return 0.0;
        }
        // first k with tau_k >= u; k >= 1 and tau_{k-1} < u
        let k = self.values.partition_point(|&v| v < u);
        let k = k.min(self.values.len() - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        (t0 + (u - v0) * (t1 - t0) / (v1 - v0)).clamp(t0, t1)
    }

    /// `tau^{-1}(T)`: first time the window reaches the horizon.
    pub fn inverse_horizon(&self) -> f64 {
        self.inverse_unchecked(self.horizon())
    }

    /// Slope of `tau` at `t`: the left slope at breakpoints, the right slope
    /// at `t = 0`.
    pub fn slope(&self, t: f64) -> Result<f64> {
        self.check_domain("t", t)?;
        Ok(self.slope_unchecked(t))
    }

    pub(crate) fn slope_unchecked(&self, t: f64) -> f64 {
        let k = self.segment_of(t);
        (self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k])
    }

    /// Continuous staircase approximation: on each of `n_segments` equal
    /// pieces the shift holds the value of `tau` at the piece midpoint,
    /// joined to the previous level by a linear ramp covering
    /// `ramp_fraction` of the piece. The last piece ends at `(T, T)`.
    pub fn midpoint_staircase(&self, n_segments: usize, ramp_fraction: f64) -> Result<Self> {
        if n_segments == 0 {
            return Err(invalid("n_segments", "must be >= 1"));
        }
        if !(ramp_fraction > 0.0 && ramp_fraction < 1.0) {
            return Err(invalid("ramp_fraction", "must lie in (0, 1)"));
        }
        let horizon = self.horizon();
        let width = horizon / n_segments as f64;
        let mut bps = Vec::with_capacity(2 * n_segments + 1);
        for k in 0..n_segments {
            let a = k as f64 * width;
            let b = if k + 1 == n_segments {
                horizon
            } else {
                (k + 1) as f64 * width
            };
            let level = self.eval_unchecked(0.5 * (a + b));
            if k == 0 {
                bps.push((0.0, level));
            } else {
                bps.push((a + ramp_fraction * width, level));
            }
            if k + 1 == n_segments {
                if level < horizon {
                    bps.push((b - ramp_fraction * width, level));
                }
                bps.push((horizon, horizon));
            } else {
                bps.push((b, level));
            }
        }
        Self::new(&bps, horizon)
    }
}

/// The baseline model equivalent to a general parameter set.
///
/// Optimal strategies map via `phi = baseline_phi / (alpha sigma)` evaluated
/// on the translated drivers `W' + signal_drift * t`, `W + noise_drift * t`,
/// and the maximal utility scales by `utility_factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineReduction {
    pub baseline: ValidatedModel,
    pub phi0_baseline: f64,
    pub utility_factor: f64,
    /// Drift rate added to the signal driver `W'`: `mu gamma / sigma`.
    pub signal_drift: f64,
    /// Drift rate added to the noise driver `W`: `mu gamma_bar / sigma`.
    pub noise_drift: f64,
    /// `alpha sigma`: baseline rates and positions are this many times
    /// the general ones (up to the shift by `mu / sigma`).
    pub position_scale: f64,
    pub s0: f64,
    pub sigma: f64,
    pub mu: f64,
}

/// Reduces a validated model to the baseline model.
pub fn to_baseline(model: &ValidatedModel) -> BaselineReduction {
    let p = model.params();
    let baseline = ModelParams {
        s0: 0.0,
        mu: 0.0,
        sigma: 1.0,
        gamma: p.gamma,
        lambda_impact: p.lambda_impact / (p.alpha * p.sigma * p.sigma),
        alpha: 1.0,
        horizon_t: p.horizon_t,
        phi0: p.alpha * p.sigma * p.phi0 - p.mu / p.sigma,
    };
    let baseline = ValidatedModel {
        params: baseline,
        rho: 1.0 / baseline.lambda_impact,
        gamma_bar: model.gamma_bar(),
    };
    BaselineReduction {
        baseline,
        phi0_baseline: baseline.params.phi0,
        utility_factor: (-p.mu * p.mu * p.horizon_t / (2.0 * p.sigma * p.sigma)).exp(),
        signal_drift: p.mu * p.gamma / p.sigma,
        noise_drift: p.mu * model.gamma_bar() / p.sigma,
        position_scale: p.alpha * p.sigma,
        s0: p.s0,
        sigma: p.sigma,
        mu: p.mu,
    }
}

impl ValidatedModel {
    pub fn to_baseline(&self) -> BaselineReduction {
        to_baseline(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(sigma: f64, lambda: f64, alpha: f64, gamma: f64) -> ModelParams {
        ModelParams {
            s0: 0.0,
            mu: 0.0,
            sigma,
            gamma,
            lambda_impact: lambda,
            alpha,
            horizon_t: 1.0,
            phi0: 0.0,
        }
    }

    #[test]
    fn validate_identity_parameters() {
        let m = validate(params(1.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(m.rho(), 1.0);
        assert_eq!(m.gamma_bar(), 1.0);
    }

    #[test]
    fn validate_derived_quantities() {
        let m = validate(params(2.0, 2.0, 0.5, 0.6)).unwrap();
        assert_eq!(m.rho(), 0.5 * 4.0 / 2.0);
        assert_relative_eq!(m.gamma_bar(), 0.8, epsilon = 1e-15);
        assert!((m.gamma() * m.gamma() + m.gamma_bar() * m.gamma_bar() - 1.0).abs() < 4e-16);
    }

    #[test]
    fn validate_rejects_boundaries() {
        for (p, field) in [
            (params(1.0, 1.0, 1.0, 1.0), "gamma"),
            (params(1.0, 1.0, 1.0, -1.0), "gamma"),
            (params(0.0, 1.0, 1.0, 0.0), "sigma"),
            (params(1.0, -1.0, 1.0, 0.0), "lambda_impact"),
            (params(1.0, 1.0, 0.0, 0.0), "alpha"),
            (params(1.0, 1.0, 1.0, f64::NAN), "gamma"),
        ] {
            match validate(p) {
                Err(Error::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected InvalidParameter({field}), got {other:?}"),
            }
        }
        let mut p = params(1.0, 1.0, 1.0, 0.0);
        p.horizon_t = 0.0;
        assert!(matches!(
            validate(p),
            Err(Error::InvalidParameter { field: "horizon_T", .. })
        ));
    }

    #[test]
    fn tau_eval_examples() {
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        assert_eq!(ts.eval(0.5).unwrap(), 0.75);
        assert_eq!(ts.eval(0.9).unwrap(), 1.0);
        let id = TimeShift::identity(1.0).unwrap();
        assert_eq!(id.eval(0.37).unwrap(), 0.37);
        let lin = TimeShift::new(&[(0.0, 0.5), (1.0, 1.0)], 1.0).unwrap();
        assert_eq!(lin.eval(0.5).unwrap(), 0.75);
        assert!(matches!(ts.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(ts.eval(-0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn tau_inverse_examples() {
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        assert_eq!(ts.inverse(0.1).unwrap(), 0.0);
        assert_eq!(ts.inverse(1.0).unwrap(), 0.75);
        let id = TimeShift::identity(1.0).unwrap();
        assert_eq!(id.inverse(0.3).unwrap(), 0.3);
        assert!(matches!(ts.inverse(1.01), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn inverse_of_flat_segment_is_its_left_end() {
        let ts = TimeShift::new(&[(0.0, 0.2), (0.3, 0.6), (0.5, 0.6), (1.0, 1.0)], 1.0).unwrap();
        assert_eq!(ts.inverse(0.6).unwrap(), 0.3);
        // just above the plateau the inverse jumps past it
        assert!(ts.inverse(0.6 + 1e-9).unwrap() > 0.5);
        assert_eq!(ts.slope(0.45).unwrap(), 0.0);
        assert_relative_eq!(ts.slope(0.3).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(ts.slope(0.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn time_shift_rejects_bad_breakpoints() {
        assert!(TimeShift::new(&[(0.0, 0.0), (1.0, 0.9)], 1.0).is_err());
        assert!(TimeShift::new(&[(0.0, 0.5), (0.5, 0.4), (1.0, 1.0)], 1.0).is_err());
        assert!(TimeShift::new(&[(0.0, 0.0), (0.5, 0.4), (1.0, 1.0)], 1.0).is_err());
        assert!(TimeShift::new(&[(0.1, 0.2), (1.0, 1.0)], 1.0).is_err());
        assert!(TimeShift::new(&[(0.0, 0.2), (0.8, 1.0)], 1.0).is_err());
        assert!(TimeShift::new(&[(0.0, 1.2), (1.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn staircase_is_admissible_and_converges() {
        let ts = TimeShift::constant_lookahead(0.25, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in [2, 4, 8, 16, 32] {
            let st = ts.midpoint_staircase(n, 0.01).unwrap();
            let err = (0..=1000)
                .map(|i| {
                    let t = i as f64 / 1000.0;
                    (st.eval(t).unwrap() - ts.eval(t).unwrap()).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < prev + 1e-12);
            prev = err;
        }
    }

    #[test]
    fn baseline_examples() {
        let m = ModelParams {
            s0: 0.0,
            mu: 0.0,
            sigma: 1.0,
            gamma: 0.3,
            lambda_impact: 1.0,
            alpha: 1.0,
            horizon_t: 1.0,
            phi0: 2.0,
        }
        .validate()
        .unwrap();
        let r = m.to_baseline();
        assert_eq!(r.baseline, m);
        assert_eq!(r.phi0_baseline, 2.0);
        assert_eq!(r.utility_factor, 1.0);

        let m = ModelParams {
            mu: 1.0,
            phi0: 0.0,
            ..*m.params()
        }
        .validate()
        .unwrap();
        let r = m.to_baseline();
        assert_eq!(r.phi0_baseline, -1.0);
        assert_relative_eq!(r.utility_factor, (-0.5f64).exp(), epsilon = 1e-15);

        let m = ModelParams {
            s0: 3.0,
            mu: 0.4,
            sigma: 2.0,
            gamma: 0.6,
            lambda_impact: 2.0,
            alpha: 0.5,
            horizon_t: 1.0,
            phi0: 1.0,
        }
        .validate()
        .unwrap();
        let r = m.to_baseline();
        assert_relative_eq!(r.phi0_baseline, 0.8, epsilon = 1e-15);
        assert_eq!(r.baseline.params().lambda_impact, 1.0);
        assert_eq!(r.baseline.rho(), m.rho());
        assert!(r.utility_factor > 0.0 && r.utility_factor < 1.0);
    }

    #[test]
    fn baseline_reduction_is_idempotent() {
        let m = ModelParams {
            s0: 1.0,
            mu: -0.3,
            sigma: 1.7,
            gamma: -0.4,
            lambda_impact: 0.3,
            alpha: 2.0,
            horizon_t: 2.0,
            phi0: 0.7,
        }
        .validate()
        .unwrap();
        let once = m.to_baseline();
        let twice = once.baseline.to_baseline();
        assert_eq!(twice.baseline, once.baseline);
        assert_eq!(twice.utility_factor, 1.0);
        assert_eq!(twice.phi0_baseline, once.phi0_baseline);
    }

    fn arb_shift() -> impl Strategy<Value = TimeShift> {
        // random monotone breakpoints with tau_k in [t_k, 1]
        (1usize..6, prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6)).prop_map(|(n, raw)| {
            let mut ts: Vec<f64> = raw.iter().take(n).map(|r| r.0).collect();
            ts.push(0.0);
            ts.push(1.0);
            ts.sort_by(f64::total_cmp);
            ts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let mut bps = Vec::new();
            let mut prev = 0.0f64;
            for (k, &t) in ts.iter().enumerate() {
                let frac = raw[k % raw.len()].1;
                let v = if k + 1 == ts.len() {
                    1.0
                } else {
                    let lo = prev.max(t);
                    lo + frac * frac * (1.0 - lo)
                };
                prev = v;
                bps.push((t, v));
            }
            TimeShift::new(&bps, 1.0).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn tau_is_bounded_and_monotone(ts in arb_shift(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (vl, vh) = (ts.eval(lo).unwrap(), ts.eval(hi).unwrap());
            prop_assert!(vl >= lo && vl <= 1.0);
            prop_assert!(vh >= vl);
        }

        #[test]
        fn inverse_round_trips(ts in arb_shift(), t in 0.0f64..=1.0, u in 0.0f64..=1.0) {
            let back = ts.inverse(ts.eval(t).unwrap()).unwrap();
            // the inverse amplifies rounding by 1 / slope
            let slack = 1e-12 / ts.slope(t).unwrap().min(1.0);
            prop_assert!(back <= t + slack);
            if ts.slope(t).unwrap() > 0.0 && t > 0.0 {
                // strictly increasing to the left of t
                prop_assert!((back - t).abs() <= slack);
            }
            let tau0 = ts.eval(0.0).unwrap();
            if u >= tau0 {
                prop_assert!((ts.eval(ts.inverse(u).unwrap()).unwrap() - u).abs() < 1e-12);
            }
            let (u1, u2) = (u.min(t), u.max(t));
            prop_assert!(ts.inverse(u1).unwrap() <= ts.inverse(u2).unwrap());
        }
    }
}
