//! Run configuration: a JSON file plus command-line overrides.
//!
//! Validation collects every problem it finds instead of stopping at the
//! first, and rejects keys that are unknown or do not apply to the chosen
//! scenario.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use qsd_core::gisin::GisinVariant;
use qsd_core::hilbert::two_level;
use qsd_core::{Ket, LindbladModel, Operator, SdeScheme, C64};

use crate::scenarios::ScenarioRegistry;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_WARMUP: f64 = 30.0;
pub const DEFAULT_SEED: u64 = 0;

/// Keys every scenario accepts.
pub const COMMON_KEYS: &[&str] = &["scenario", "seed", "dt", "workers", "output"];

/// Values given on the command line; they replace the file's entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_trajectories: Option<usize>,
    pub dt: Option<f64>,
    pub unraveling: Option<String>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

/// A complex number written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl Complex {
    pub fn value(self) -> C64 {
        match self {
            Complex::Real(x) => C64::new(x, 0.0),
            Complex::Pair([re, im]) => C64::new(re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Complex>>;

/// Two-level models built from `gamma` and `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelBuilder {
    Decay,
    Fluorescence,
}

/// Either a named builder or explicit matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Builder {
        builder: ModelBuilder,
    },
    Matrices {
        hamiltonian: MatrixSpec,
        #[serde(default)]
        lindblads: Vec<MatrixSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    /// `"steady_state"` or `"random_uniform"`.
    Named(String),
    Ket(Vec<Complex>),
}

/// The validated configuration with every applicable default filled in.
/// Keys that do not apply to the scenario stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub dt: f64,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trajectories: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unraveling: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SdeScheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_sizes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gisin_variant: Option<GisinVariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<MatrixSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<Vec<Complex>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi0: Option<Vec<Complex>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
}

impl RunConfig {
    fn empty(scenario: String) -> Self {
        Self {
            scenario,
            seed: DEFAULT_SEED,
            dt: DEFAULT_DT,
            workers: 1,
            output: PathBuf::from("out"),
            n_trajectories: None,
            unraveling: None,
            scheme: None,
            gamma: None,
            omega: None,
            t_max: None,
            t_nodes: None,
            tau_max: None,
            tau_nodes: None,
            warmup: None,
            t: None,
            step_sizes: None,
            gisin_variant: None,
            n_list: None,
            methods: None,
            target_error: None,
            model: None,
            observable: None,
            b: None,
            phi0: None,
            psi0: None,
            initial: None,
        }
    }

    /// `t_k = k·t_max/t_nodes` for `k = 1..=t_nodes`.
    pub fn t_grid(&self) -> Vec<f64> {
        let (t_max, n) = (self.t_max.unwrap_or(0.0), self.t_nodes.unwrap_or(0));
        (1..=n).map(|k| k as f64 * t_max / n as f64).collect()
    }

    /// `τ_k = k·tau_max/(tau_nodes − 1)` for `k = 0..tau_nodes`.
    pub fn tau_grid(&self) -> Vec<f64> {
        let (tau_max, n) = (self.tau_max.unwrap_or(0.0), self.tau_nodes.unwrap_or(0));
        (0..n).map(|k| k as f64 * tau_max / (n - 1) as f64).collect()
    }

    pub fn sde_scheme(&self) -> SdeScheme {
        self.scheme.unwrap_or(SdeScheme::Normalized)
    }
}

/// Every key any scenario understands.
const ALL_KEYS: &[&str] = &[
    "scenario",
    "seed",
    "dt",
    "workers",
    "output",
    "n_trajectories",
    "unraveling",
    "scheme",
    "gamma",
    "omega",
    "t_max",
    "t_nodes",
    "tau_max",
    "tau_nodes",
    "warmup",
    "t",
    "step_sizes",
    "gisin_variant",
    "n_list",
    "methods",
    "target_error",
    "model",
    "observable",
    "b",
    "phi0",
    "psi0",
    "initial",
];

fn field<T: DeserializeOwned>(map: &Map<String, Value>, key: &str, errors: &mut Vec<String>) -> Option<T> {
    let v = map.get(key)?;
    match serde_json::from_value(v.clone()) {
        Ok(x) => Some(x),
        Err(e) => {
            errors.push(format!("field `{key}`: {e}"));
            None
        }
    }
}

/// Parses and validates `text` with `overrides` applied on top. On failure
/// returns every diagnostic found.
pub fn validate(text: &str, overrides: &Overrides, registry: &ScenarioRegistry) -> Result<RunConfig, Vec<String>> {
    let value: Value = serde_json::from_str(text).map_err(|e| vec![format!("line {} column {}: {e}", e.line(), e.column())])?;
    let Value::Object(mut map) = value else {
        return Err(vec!["the configuration must be a JSON object".into()]);
    };
    apply_overrides(&mut map, overrides);

    let mut errors = Vec::new();
    let scenario: Option<String> = match map.get("scenario") {
        None => {
            errors.push("missing required field `scenario`".into());
            None
        }
        Some(_) => field(&map, "scenario", &mut errors),
    };
    let scenario = scenario.and_then(|name| match registry.get(&name) {
        Some(s) => Some(s),
        None => {
            let known: Vec<&str> = registry.names().collect();
            errors.push(format!("field `scenario`: unknown scenario `{name}` (expected one of {})", known.join(", ")));
            None
        }
    });

    for key in map.keys() {
        if !ALL_KEYS.contains(&key.as_str()) {
            errors.push(format!("unknown key `{key}`"));
        } else if let Some(s) = scenario {
            if !COMMON_KEYS.contains(&key.as_str()) && !s.keys().contains(&key.as_str()) {
                errors.push(format!("key `{key}` does not apply to scenario `{}`", s.name()));
            }
        }
    }

    let Some(scenario) = scenario else {
        return Err(errors);
    };
    let mut cfg = RunConfig::empty(scenario.name().to_string());
    if let Some(x) = field(&map, "seed", &mut errors) {
        cfg.seed = x;
    }
    if let Some(x) = field(&map, "dt", &mut errors) {
        cfg.dt = x;
    }
    if let Some(x) = field(&map, "workers", &mut errors) {
        cfg.workers = x;
    }
    if let Some(x) = field(&map, "output", &mut errors) {
        cfg.output = x;
    }
    cfg.n_trajectories = field(&map, "n_trajectories", &mut errors);
    cfg.unraveling = field(&map, "unraveling", &mut errors);
    cfg.scheme = field(&map, "scheme", &mut errors);
    cfg.gamma = field(&map, "gamma", &mut errors);
    cfg.omega = field(&map, "omega", &mut errors);
    cfg.t_max = field(&map, "t_max", &mut errors);
    cfg.t_nodes = field(&map, "t_nodes", &mut errors);
    cfg.tau_max = field(&map, "tau_max", &mut errors);
    cfg.tau_nodes = field(&map, "tau_nodes", &mut errors);
    cfg.warmup = field(&map, "warmup", &mut errors);
    cfg.t = field(&map, "t", &mut errors);
    cfg.step_sizes = field(&map, "step_sizes", &mut errors);
    cfg.gisin_variant = field(&map, "gisin_variant", &mut errors);
    cfg.n_list = field(&map, "n_list", &mut errors);
    cfg.methods = field(&map, "methods", &mut errors);
    cfg.target_error = field(&map, "target_error", &mut errors);
    cfg.model = field(&map, "model", &mut errors);
    cfg.observable = field(&map, "observable", &mut errors);
    cfg.b = field(&map, "b", &mut errors);
    cfg.phi0 = field(&map, "phi0", &mut errors);
    cfg.psi0 = field(&map, "psi0", &mut errors);
    cfg.initial = field(&map, "initial", &mut errors);

    // Only the keys that parsed and apply get defaults and checks.
    if errors.is_empty() {
        scenario.fill_defaults(&mut cfg);
        check_common(&cfg, &mut errors);
        scenario.check(&cfg, &mut errors);
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

fn apply_overrides(map: &mut Map<String, Value>, o: &Overrides) {
    if let Some(x) = o.seed {
        map.insert("seed".into(), x.into());
    }
    if let Some(x) = o.n_trajectories {
        map.insert("n_trajectories".into(), x.into());
    }
    if let Some(x) = o.dt {
        map.insert("dt".into(), x.into());
    }
    if let Some(x) = &o.unraveling {
        map.insert("unraveling".into(), x.clone().into());
    }
    if let Some(x) = o.workers {
        map.insert("workers".into(), x.into());
    }
    if let Some(x) = &o.output {
        map.insert("output".into(), x.to_string_lossy().into_owned().into());
    }
}

fn check_common(cfg: &RunConfig, errors: &mut Vec<String>) {
    positive("dt", Some(cfg.dt), errors);
    if cfg.workers == 0 {
        errors.push("workers must be at least 1".into());
    }
    if let Some(n) = cfg.n_trajectories {
        if n < 2 {
            errors.push("n_trajectories must be at least 2".into());
        }
    }
    if let Some(u) = &cfg.unraveling {
        if !qsd_core::UnravelingRegistry::default().contains(u) {
            errors.push(format!("unraveling `{u}` is not one of qsd, jump"));
        }
    }
    positive("gamma", cfg.gamma, errors);
    positive("t_max", cfg.t_max, errors);
    positive("tau_max", cfg.tau_max, errors);
    nonnegative("warmup", cfg.warmup, errors);
    nonnegative("t", cfg.t, errors);
    if let Some(o) = cfg.omega {
        if !o.is_finite() {
            errors.push("omega must be finite".into());
        }
    }
    if cfg.t_nodes == Some(0) {
        errors.push("t_nodes must be positive".into());
    }
    if matches!(cfg.tau_nodes, Some(n) if n < 2) {
        errors.push("tau_nodes must be at least 2".into());
    }
}

pub(crate) fn positive(name: &str, v: Option<f64>, errors: &mut Vec<String>) {
    if let Some(x) = v {
        if !(x > 0.0) || !x.is_finite() {
            errors.push(format!("{name} must be positive"));
        }
    }
}

fn nonnegative(name: &str, v: Option<f64>, errors: &mut Vec<String>) {
    if let Some(x) = v {
        if !(x >= 0.0) || !x.is_finite() {
            errors.push(format!("{name} must be nonnegative"));
        }
    }
}

pub fn build_matrix(name: &str, m: &MatrixSpec) -> Result<Operator, String> {
    let rows: Vec<Vec<C64>> = m.iter().map(|r| r.iter().map(|z| z.value()).collect()).collect();
    Operator::from_rows(&rows).map_err(|e| format!("{name}: {e}"))
}

pub fn build_model(spec: &ModelSpec, gamma: f64, omega: f64) -> Result<LindbladModel, String> {
    let (hamiltonian, lindblads) = match spec {
        ModelSpec::Builder { builder: ModelBuilder::Decay } => return Ok(two_level::decay_model(gamma)),
        ModelSpec::Builder {
            builder: ModelBuilder::Fluorescence,
        } => return Ok(two_level::fluorescence_model(omega, gamma)),
        ModelSpec::Matrices { hamiltonian, lindblads } => (hamiltonian, lindblads),
    };
    let h = build_matrix("model.hamiltonian", hamiltonian)?;
    let ls = lindblads
        .iter()
        .enumerate()
        .map(|(i, l)| build_matrix(&format!("model.lindblads[{i}]"), l))
        .collect::<Result<Vec<_>, _>>()?;
    LindbladModel::new(h, ls).map_err(|e| format!("model: {e}"))
}

pub fn build_ket(name: &str, v: &[Complex]) -> Result<Ket, String> {
    let k = Ket::new(v.iter().map(|z| z.value()).collect()).map_err(|e| format!("{name}: {e}"))?;
    if !k.is_normalized() {
        return Err(format!("{name} must be normalized (squared norm {})", k.norm_sqr()));
    }
    Ok(k)
}
