use std::path::{Path, PathBuf};

use peeklab_core::variational::SignalSegment;
use peeklab_core::{ModelParams, TimeShift, ValidatedModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub lambda_impact: f64,
    pub alpha: f64,
    pub horizon_t: f64,
    pub phi0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeShiftBlock {
    Identity,
    ConstantLookahead { delta: f64 },
    Breakpoints { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentBlock {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentBlock {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Falls back to `PEEKLAB_SEED`, then to 0.
    pub seed: Option<u64>,
    pub gammas: Vec<f64>,
    pub s_points: usize,
    pub m_nodes: usize,
    /// Observed signal on `[0, tau(0)]`; zero when absent.
    pub signal_segment: Option<SegmentBlock>,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        Self {
            n_paths: 20_000,
            n_steps: 200,
            seed: None,
            gammas: (0..10).map(|i| i as f64 / 10.0).collect(),
            s_points: 10,
            m_nodes: 1000,
            signal_segment: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub time_shift: TimeShiftBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// A configuration that passed validation, with the seed resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub model: ValidatedModel,
    pub time_shift: TimeShift,
    pub seed: u64,
    pub hash: String,
}

impl Resolved {
    /// Observed signal segment, zero on `[0, tau(0)]` unless configured.
    pub fn signal_segment(&self) -> Result<SignalSegment, CliError> {
        let tau0 = self.time_shift.eval(0.0)?;
        match &self.config.experiment.signal_segment {
            Some(s) => Ok(SignalSegment::new(s.times.clone(), s.values.clone())?),
            None if tau0 == 0.0 => Ok(SignalSegment::empty()),
            None => Ok(SignalSegment::new(vec![0.0, tau0], vec![0.0, 0.0])?),
        }
    }
}

/// Sets `path` (dot separated) in `root` to `raw`, read as JSON when it
/// parses and as a string otherwise.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<(), CliError> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let mut keys = path.split('.').peekable();
    while let Some(key) = keys.next() {
        if key.is_empty() {
            return Err(CliError::Config(format!("bad override key `{path}`")));
        }
        let map = match node {
            Value::Object(map) => map,
            _ => return Err(CliError::Config(format!("`{path}`: `{key}` is not inside an object"))),
        };
        if keys.peek().is_none() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one key")
}

fn parse_override(s: &str) -> Result<(&str, &str), CliError> {
    s.split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{s}` is not KEY=VALUE")))
}

pub fn load(path: &Path, overrides: &[String], env_seed: Option<&str>) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut root: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for o in overrides {
        let (k, v) = parse_override(o)?;
        apply_override(&mut root, k, v)?;
    }
    let mut config: RunConfig = serde_json::from_value(root).map_err(|e| CliError::Config(e.to_string()))?;
    if config.experiment.seed.is_none() {
        let seed = match env_seed {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("PEEKLAB_SEED `{s}` is not an unsigned integer")))?,
            None => 0,
        };
        config.experiment.seed = Some(seed);
    }
    resolve(config)
}

pub fn resolve(config: RunConfig) -> Result<Resolved, CliError> {
    let m = &config.model;
    let model = ModelParams {
        s0: m.s0,
        mu: m.mu,
        sigma: m.sigma,
        gamma: m.gamma,
        lambda_impact: m.lambda_impact,
        alpha: m.alpha,
        horizon_t: m.horizon_t,
        phi0: m.phi0,
    }
    .validate()?;
    let horizon = model.horizon();
    let time_shift = match &config.time_shift {
        TimeShiftBlock::Identity => TimeShift::identity(horizon)?,
        TimeShiftBlock::ConstantLookahead { delta } => TimeShift::constant_lookahead(*delta, horizon)?,
        TimeShiftBlock::Breakpoints { points } => TimeShift::new(points, horizon)?,
    };
    let e = &config.experiment;
    if e.n_paths < 2 || e.n_steps == 0 || e.m_nodes < 8 || e.s_points == 0 {
        return Err(CliError::Config(
            "experiment needs n_paths >= 2, n_steps >= 1, m_nodes >= 8, s_points >= 1".into(),
        ));
    }
    if e.gammas.iter().any(|g| !(0.0..1.0).contains(g)) {
        return Err(CliError::Config("experiment.gammas must lie in [0, 1)".into()));
    }
    let seed = e.seed.expect("seed resolved before validation");
    let hash = config_hash(&config);
    let resolved = Resolved {
        config,
        model,
        time_shift,
        seed,
        hash,
    };
    resolved.signal_segment()?;
    Ok(resolved)
}

/// First 16 hex digits of the SHA-256 of the canonical JSON form.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))[..16].to_string()
}
