//! Named experiments. Each scenario declares the keys it accepts, fills its
//! defaults, checks its own constraints and produces the output files.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use qsd_core::ensemble::{benchmark_sweep, BenchmarkPoint};
use qsd_core::gisin::{gisin_matrix_element, GisinConfig, GisinVariant, InstabilityReport};
use qsd_core::hilbert::two_level::{self, excited, sigma_minus, sigma_plus};
use qsd_core::master::{oracle_two_time, regression_matrix_element};
use qsd_core::{
    correlate, heisenberg_element, CorrelationRequest, DensityMatrix, EnsembleOptions, EnsembleResult, Error,
    InitialCondition, Ket, LindbladModel, OdeConfig, Operator, SdeScheme, Unraveling, UnravelingParams,
    UnravelingRegistry, C64,
};

use crate::config::{build_ket, build_matrix, build_model, positive, InitialSpec, RunConfig, DEFAULT_WARMUP};
use crate::output::{reference_csv, series_csv, CsvTable};

/// Files and metadata produced by a successful run. `files` and `details`
/// depend only on the configuration; `timing` holds everything else.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub details: BTreeMap<String, Value>,
    pub timing: BTreeMap<String, Value>,
}

impl Artifacts {
    fn record_run(&mut self, label: &str, res: &EnsembleResult) {
        self.details.insert(
            label.into(),
            json!({ "method": res.method, "n": res.n, "counters": res.counters }),
        );
        self.timing.insert(
            label.into(),
            json!({ "wall_time_seconds": res.wall_time_seconds, "core_seconds": res.core_seconds }),
        );
    }

    fn add_file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }
}

/// A run that failed after validation, with whatever diagnostics it has.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub report: Option<Value>,
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self { error, report: None }
    }
}

pub trait Scenario: Send + Sync {
    fn name(&self) -> &'static str;

    /// Keys accepted on top of the common ones.
    fn keys(&self) -> &'static [&'static str];

    fn fill_defaults(&self, cfg: &mut RunConfig);

    /// Scenario-specific constraints, run after the defaults are filled.
    fn check(&self, _cfg: &RunConfig, _errors: &mut Vec<String>) {}

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, RunFailure>;
}

pub struct ScenarioRegistry {
    scenarios: BTreeMap<&'static str, Box<dyn Scenario>>,
}

impl ScenarioRegistry {
    pub fn empty() -> Self {
        Self {
            scenarios: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, s: Box<dyn Scenario>) {
        self.scenarios.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Scenario> {
        self.scenarios.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.scenarios.keys().copied()
    }
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(DecayElement));
        r.register(Box::new(FluorescenceG1));
        r.register(Box::new(GisinCompare));
        r.register(Box::new(Benchmark));
        r.register(Box::new(Custom));
        r
    }
}

fn opts(cfg: &RunConfig) -> EnsembleOptions {
    EnsembleOptions {
        seed: cfg.seed,
        workers: cfg.workers,
    }
}

fn unraveling(cfg: &RunConfig, name: &str) -> Result<Box<dyn Unraveling>, Error> {
    UnravelingRegistry::default().create(
        name,
        &UnravelingParams {
            dt: cfg.dt,
            scheme: cfg.sde_scheme(),
        },
    )
}

fn set<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

fn plus() -> Ket {
    Ket::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2]).expect("unit vector")
}

fn gamma(cfg: &RunConfig) -> f64 {
    cfg.gamma.unwrap_or(1.0)
}

/// `⟨e|σ⁺(t)|+⟩` for spontaneous decay.
pub struct DecayElement;

impl Scenario for DecayElement {
    fn name(&self) -> &'static str {
        "decay-element"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["n_trajectories", "unraveling", "scheme", "gamma", "t_max", "t_nodes"]
    }

    fn fill_defaults(&self, cfg: &mut RunConfig) {
        set(&mut cfg.n_trajectories, 1000);
        set(&mut cfg.unraveling, "qsd".into());
        set(&mut cfg.scheme, SdeScheme::Normalized);
        set(&mut cfg.gamma, 1.0);
        set(&mut cfg.t_max, 4.0);
        set(&mut cfg.t_nodes, 40);
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, RunFailure> {
        let model = two_level::decay_model(gamma(cfg));
        let grid = cfg.t_grid();
        let method = unraveling(cfg, cfg.unraveling.as_deref().unwrap_or("qsd"))?;
        let n = cfg.n_trajectories.unwrap_or(1000);
        let res = heisenberg_element(&sigma_plus(), &excited(), &plus(), &model, &grid, n, method.as_ref(), &opts(cfg))?;
        let reference = regression_matrix_element(&sigma_plus(), &excited(), &plus(), &model, &grid, &OdeConfig::default())?;
        let mut out = Artifacts::default();
        out.add_file("results.csv", series_csv(&res)?);
        out.add_file("reference.csv", reference_csv(&grid, &reference)?);
        out.record_run("run", &res);
        Ok(out)
    }
}

/// Steady-state `⟨σ⁺(τ)σ⁻(0)⟩` of the resonantly driven atom.
pub struct FluorescenceG1;

fn fluorescence(cfg: &RunConfig) -> (LindbladModel, Vec<f64>, f64) {
    let model = two_level::fluorescence_model(cfg.omega.unwrap_or(10.0), gamma(cfg));
    (model, cfg.tau_grid(), cfg.warmup.unwrap_or(DEFAULT_WARMUP))
}

fn g1_request(grid: &[f64], n: usize, warmup: f64) -> CorrelationRequest {
    CorrelationRequest {
        a: sigma_plus(),
        b: sigma_minus(),
        t: 0.0,
        tau_grid: grid.to_vec(),
        n_trajectories: n,
        initial: InitialCondition::SteadyState,
        warmup_time: Some(warmup),
    }
}

/// Oracle for trajectories started Haar-uniformly: `I/d` evolved for
/// `pre`, then the regression step over the grid.
fn random_start_reference(
    a: &Operator,
    b: &Operator,
    model: &LindbladModel,
    pre: f64,
    grid: &[f64],
) -> Result<Vec<C64>, Error> {
    let rho0 = DensityMatrix::maximally_mixed(model.dim())?;
    oracle_two_time(a, b, model, &rho0, pre, grid, &OdeConfig::default())
}

impl Scenario for FluorescenceG1 {
    fn name(&self) -> &'static str {
        "fluorescence-g1"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["n_trajectories", "unraveling", "scheme", "gamma", "omega", "tau_max", "tau_nodes", "warmup"]
    }

    fn fill_defaults(&self, cfg: &mut RunConfig) {
        set(&mut cfg.n_trajectories, 10_000);
        set(&mut cfg.unraveling, "qsd".into());
        set(&mut cfg.scheme, SdeScheme::Normalized);
        set(&mut cfg.gamma, 1.0);
        set(&mut cfg.omega, 10.0);
        set(&mut cfg.tau_max, 3.0);
        set(&mut cfg.tau_nodes, 31);
        set(&mut cfg.warmup, DEFAULT_WARMUP);
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, RunFailure> {
        let (model, grid, warmup) = fluorescence(cfg);
        let method = unraveling(cfg, cfg.unraveling.as_deref().unwrap_or("qsd"))?;
        let req = g1_request(&grid, cfg.n_trajectories.unwrap_or(10_000), warmup);
        let res = correlate(&req, &model, method.as_ref(), &opts(cfg))?;
        let reference = random_start_reference(&req.a, &req.b, &model, warmup, &grid)?;
        let mut out = Artifacts::default();
        out.add_file("results.csv", series_csv(&res)?);
        out.add_file("reference.csv", reference_csv(&grid, &reference)?);
        out.record_run("run", &res);
        Ok(out)
    }
}

/// The decay element from the doubled-space method and from the coupled
/// two-state scheme at several step sizes.
pub struct GisinCompare;

#[derive(Serialize)]
struct StepReport<'a> {
    step_size: f64,
    variant: GisinVariant,
    #[serde(flatten)]
    report: &'a InstabilityReport,
}

impl Scenario for GisinCompare {
    fn name(&self) -> &'static str {
        "gisin-compare"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["n_trajectories", "scheme", "gamma", "t_max", "t_nodes", "step_sizes", "gisin_variant"]
    }

    fn fill_defaults(&self, cfg: &mut RunConfig) {
        set(&mut cfg.n_trajectories, 10_000);
        set(&mut cfg.scheme, SdeScheme::Normalized);
        set(&mut cfg.gamma, 1.0);
        set(&mut cfg.t_max, 4.0);
        set(&mut cfg.t_nodes, 40);
        set(&mut cfg.step_sizes, vec![1e-2, 1e-3, 1e-4]);
        set(&mut cfg.gisin_variant, GisinVariant::QuasiLinear);
    }

    fn check(&self, cfg: &RunConfig, errors: &mut Vec<String>) {
        let steps = cfg.step_sizes.as_deref().unwrap_or_default();
        if steps.is_empty() {
            errors.push("step_sizes must not be empty".into());
        }
        for &h in steps {
            positive("every step size", Some(h), errors);
        }
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, RunFailure> {
        let model = two_level::decay_model(gamma(cfg));
        let grid = cfg.t_grid();
        let n = cfg.n_trajectories.unwrap_or(10_000);
        let a = sigma_plus();
        let (phi0, psi0) = (excited(), plus());
        let doubled = unraveling(cfg, "qsd")?;
        let res = heisenberg_element(&a, &phi0, &psi0, &model, &grid, n, doubled.as_ref(), &opts(cfg))?;
        let reference = regression_matrix_element(&a, &phi0, &psi0, &model, &grid, &OdeConfig::default())?;

        let variant = cfg.gisin_variant.unwrap_or(GisinVariant::QuasiLinear);
        let mut table = CsvTable::new(&["step_size", "grid", "mean_re", "mean_im", "std_error"]);
        let mut reports = Vec::new();
        let mut runs = Vec::new();
        for &h in cfg.step_sizes.as_deref().unwrap_or_default() {
            let config = GisinConfig::new(h, variant)?;
            let run = gisin_matrix_element(&a, &phi0, &psi0, &model, &grid, n, &config, &opts(cfg))?;
            let e = &run.estimate;
            for (k, t) in grid.iter().enumerate() {
                table.row(&[h, *t, e.mean[k].re, e.mean[k].im, e.std_error[k]]);
            }
            reports.push(serde_json::to_value(StepReport {
                step_size: h,
                variant,
                report: &run.report,
            })
            .expect("serializable"));
            runs.push((h, run));
        }

        let mut out = Artifacts::default();
        out.add_file("results.csv", series_csv(&res)?);
        out.add_file("reference.csv", reference_csv(&grid, &reference)?);
        out.add_file("gisin.csv", table.finish()?);
        out.add_file("instability.json", crate::output::json_bytes(&reports));
        out.record_run("doubled", &res);
        for (h, run) in &runs {
            out.record_run(&format!("gisin_h={h}"), &run.estimate);
        }
        Ok(out)
    }
}

/// Cost versus accuracy of the two unravelings on the fluorescence problem.
pub struct Benchmark;

fn point_details(p: &BenchmarkPoint) -> Value {
    json!({
        "method": p.method,
        "n": p.n,
        "rms_relative_error": p.rms_relative_error,
        "est_std": p.est_std,
        "draws_total": p.draws_total,
        "steps_total": p.steps_total,
        "jumps_total": p.jumps_total,
    })
}

impl Scenario for Benchmark {
    fn name(&self) -> &'static str {
        "benchmark"
    }

    fn keys(&self) -> &'static [&'static str] {
        &["scheme", "gamma", "omega", "tau_max", "tau_nodes", "warmup", "n_list", "methods", "target_error"]
    }

    fn fill_defaults(&self, cfg: &mut RunConfig) {
        set(&mut cfg.scheme, SdeScheme::Normalized);
        set(&mut cfg.gamma, 1.0);
        set(&mut cfg.omega, 10.0);
        set(&mut cfg.tau_max, 3.0);
        set(&mut cfg.tau_nodes, 31);
        set(&mut cfg.warmup, DEFAULT_WARMUP);
        set(&mut cfg.n_list, vec![250, 1000, 4000]);
        set(&mut cfg.methods, vec!["qsd".into(), "jump".into()]);
        set(&mut cfg.target_error, 0.03);
    }

    fn check(&self, cfg: &RunConfig, errors: &mut Vec<String>) {
        let ns = cfg.n_list.as_deref().unwrap_or_default();
        if ns.is_empty() || ns.iter().any(|&n| n < 2) {
            errors.push("n_list must be nonempty with every entry at least 2".into());
        }
        let methods = cfg.methods.as_deref().unwrap_or_default();
        if methods.is_empty() {
            errors.push("methods must not be empty".into());
        }
        let registry = UnravelingRegistry::default();
        for m in methods {
            if !registry.contains(m) {
                errors.push(format!("method `{m}` is not one of qsd, jump"));
            }
        }
        positive("target_error", cfg.target_error, errors);
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, RunFailure> {
        let (model, grid, warmup) = fluorescence(cfg);
        let req = g1_request(&grid, 2, warmup);
        let reference = random_start_reference(&req.a, &req.b, &model, warmup, &grid)?;
        let methods = cfg
            .methods
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|m| unraveling(cfg, m))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&dyn Unraveling> = methods.iter().map(|m| m.as_ref()).collect();
        let n_list = cfg.n_list.as_deref().unwrap_or_default();
        let points = benchmark_sweep(&req, &model, &reference, n_list, &refs, cfg.seed, cfg.workers)?;

        let mut table = CsvTable::new(&["method", "n", "rms_relative_error", "est_std", "wall_time_seconds", "draws_total"]);
        for p in &points {
            table.row_strings(vec![
                p.method.clone(),
                p.n.to_string(),
                p.rms_relative_error.to_string(),
                p.est_std.to_string(),
                p.wall_time_seconds.to_string(),
                p.draws_total.to_string(),
            ]);
        }
        let target = cfg.target_error.unwrap_or(0.03);
        let mut matched = BTreeMap::new();
        for m in &refs {
            // The largest ensemble gives the most reliable extrapolation.
            if let Some(p) = points.iter().filter(|p| p.method == m.name()).max_by_key(|p| p.n) {
                matched.insert(m.name().to_string(), p.wall_time_at_error(target));
            }
        }

        let mut out = Artifacts::default();
        out.add_file("reference.csv", reference_csv(&grid, &reference)?);
        out.add_file("benchmark.csv", table.finish()?);
        out.details
            .insert("points".into(), Value::Array(points.iter().map(point_details).collect()));
        out.timing.insert(
            "wall_time_seconds".into(),
            json!(points.iter().map(|p| (format!("{}/{}", p.method, p.n), p.wall_time_seconds)).collect::<BTreeMap<_, _>>()),
        );
        out.timing
            .insert("wall_time_at_target_error".into(), json!({ "target": target, "seconds": matched }));
        Ok(out)
    }
}

/// A user-supplied model in one of two modes: a Heisenberg matrix element
/// (`phi0`, `psi0`) or a two-time correlation (`b`, `initial`).
pub struct Custom;

enum Mode {
    Element,
    Correlation,
}

fn mode(cfg: &RunConfig) -> Result<Mode, String> {
    let element = cfg.phi0.is_some() || cfg.psi0.is_some();
    let correlation = cfg.b.is_some() || cfg.initial.is_some();
    match (element, correlation) {
        (true, false) => Ok(Mode::Element),
        (false, true) => Ok(Mode::Correlation),
        (true, true) => Err("custom: give either phi0/psi0 (matrix element) or b/initial (correlation), not both".into()),
        (false, false) => Err("custom: give phi0 and psi0 for a matrix element or b for a correlation".into()),
    }
}

struct CustomProblem {
    model: LindbladModel,
    a: Operator,
    kind: CustomKind,
}

enum CustomKind {
    Element { phi0: Ket, psi0: Ket },
    Correlation { b: Operator, initial: InitialCondition },
}

fn custom_problem(cfg: &RunConfig) -> Result<CustomProblem, Vec<String>> {
    let mut errors = Vec::new();
    let mode = mode(cfg).map_err(|e| vec![e])?;
    let Some(spec) = &cfg.model else {
        return Err(vec!["custom: missing required field `model`".into()]);
    };
    let model = build_model(spec, gamma(cfg), cfg.omega.unwrap_or(10.0)).map_err(|e| vec![e])?;
    let d = model.dim();
    let dim_ok = |name: &str, got: usize, errors: &mut Vec<String>| {
        if got != d {
            errors.push(format!("{name} has dimension {got}, the model has {d}"));
        }
    };
    let a = match &cfg.observable {
        None => {
            errors.push("custom: missing required field `observable`".into());
            None
        }
        Some(m) => build_matrix("observable", m).map_err(|e| errors.push(e)).ok(),
    };
    if let Some(a) = &a {
        dim_ok("observable", a.dim(), &mut errors);
    }
    let kind = match mode {
        Mode::Element => {
            for key in ["phi0", "psi0"] {
                let v = if key == "phi0" { &cfg.phi0 } else { &cfg.psi0 };
                if v.is_none() {
                    errors.push(format!("custom: missing required field `{key}`"));
                }
            }
            for (key, present) in [("t", cfg.t.is_some()), ("warmup", cfg.warmup.is_some()), ("tau_max", cfg.tau_max.is_some()), ("tau_nodes", cfg.tau_nodes.is_some())] {
                if present {
                    errors.push(format!("key `{key}` does not apply to a custom matrix element"));
                }
            }
            let phi0 = cfg.phi0.as_ref().and_then(|v| build_ket("phi0", v).map_err(|e| errors.push(e)).ok());
            let psi0 = cfg.psi0.as_ref().and_then(|v| build_ket("psi0", v).map_err(|e| errors.push(e)).ok());
            match (phi0, psi0) {
                (Some(phi0), Some(psi0)) => {
                    dim_ok("phi0", phi0.dim(), &mut errors);
                    dim_ok("psi0", psi0.dim(), &mut errors);
                    Some(CustomKind::Element { phi0, psi0 })
                }
                _ => None,
            }
        }
        Mode::Correlation => {
            for (key, present) in [("t_max", cfg.t_max.is_some()), ("t_nodes", cfg.t_nodes.is_some())] {
                if present {
                    errors.push(format!("key `{key}` does not apply to a custom correlation"));
                }
            }
            let b = match &cfg.b {
                None => {
                    errors.push("custom: missing required field `b`".into());
                    None
                }
                Some(m) => build_matrix("b", m).map_err(|e| errors.push(e)).ok(),
            };
            if let Some(b) = &b {
                dim_ok("b", b.dim(), &mut errors);
            }
            let initial = match cfg.initial.as_ref().unwrap_or(&InitialSpec::Named("steady_state".into())) {
                InitialSpec::Named(s) if s == "steady_state" => Some(InitialCondition::SteadyState),
                InitialSpec::Named(s) if s == "random_uniform" => Some(InitialCondition::RandomUniform),
                InitialSpec::Named(s) => {
                    errors.push(format!("initial `{s}` is not steady_state, random_uniform or a ket"));
                    None
                }
                InitialSpec::Ket(v) => {
                    if cfg.warmup.is_some() {
                        errors.push("key `warmup` does not apply to an explicit initial ket".into());
                    }
                    build_ket("initial", v)
                        .map_err(|e| errors.push(e))
                        .ok()
                        .inspect(|k| dim_ok("initial", k.dim(), &mut errors))
                        .map(InitialCondition::Ket)
                }
            };
            b.zip(initial).map(|(b, initial)| CustomKind::Correlation { b, initial })
        }
    };
    match (a, kind) {
        (Some(a), Some(kind)) if errors.is_empty() => Ok(CustomProblem { model, a, kind }),
        _ => Err(errors),
    }
}

impl Scenario for Custom {
    fn name(&self) -> &'static str {
        "custom"
    }

    fn keys(&self) -> &'static [&'static str] {
        &[
            "n_trajectories",
            "unraveling",
            "scheme",
            "gamma",
            "omega",
            "model",
            "observable",
            "phi0",
            "psi0",
            "t_max",
            "t_nodes",
            "b",
            "initial",
            "t",
            "warmup",
            "tau_max",
            "tau_nodes",
        ]
    }

    fn fill_defaults(&self, cfg: &mut RunConfig) {
        set(&mut cfg.n_trajectories, 1000);
        set(&mut cfg.unraveling, "qsd".into());
        set(&mut cfg.scheme, SdeScheme::Normalized);
        match mode(cfg) {
            Ok(Mode::Element) => {
                set(&mut cfg.t_max, 4.0);
                set(&mut cfg.t_nodes, 40);
            }
            Ok(Mode::Correlation) => {
                set(&mut cfg.initial, InitialSpec::Named("steady_state".into()));
                set(&mut cfg.t, 0.0);
                set(&mut cfg.tau_max, 3.0);
                set(&mut cfg.tau_nodes, 31);
                if matches!(cfg.initial, Some(InitialSpec::Named(_))) {
                    set(&mut cfg.warmup, DEFAULT_WARMUP);
                }
            }
            Err(_) => {}
        }
    }

    fn check(&self, cfg: &RunConfig, errors: &mut Vec<String>) {
        if let Err(e) = custom_problem(cfg) {
            errors.extend(e);
        }
    }

    fn run(&self, cfg: &RunConfig) -> Result<Artifacts, RunFailure> {
        let p = custom_problem(cfg).map_err(|e| Error::InvalidArgument(e.join("; ")))?;
        let method = unraveling(cfg, cfg.unraveling.as_deref().unwrap_or("qsd"))?;
        let n = cfg.n_trajectories.unwrap_or(1000);
        let ode = OdeConfig::default();
        let (grid, res, reference) = match p.kind {
            CustomKind::Element { phi0, psi0 } => {
                let grid = cfg.t_grid();
                let res = heisenberg_element(&p.a, &phi0, &psi0, &p.model, &grid, n, method.as_ref(), &opts(cfg))?;
                let reference = regression_matrix_element(&p.a, &phi0, &psi0, &p.model, &grid, &ode)?;
                (grid, res, reference)
            }
            CustomKind::Correlation { b, initial } => {
                let grid = cfg.tau_grid();
                let t = cfg.t.unwrap_or(0.0);
                let reference = match &initial {
                    InitialCondition::Ket(k) => {
                        oracle_two_time(&p.a, &b, &p.model, &DensityMatrix::pure(k)?, t, &grid, &ode)?
                    }
                    _ => random_start_reference(&p.a, &b, &p.model, cfg.warmup.unwrap_or(0.0) + t, &grid)?,
                };
                let req = CorrelationRequest {
                    a: p.a,
                    b,
                    t,
                    tau_grid: grid.clone(),
                    n_trajectories: n,
                    initial,
                    warmup_time: Some(cfg.warmup.unwrap_or(0.0)),
                };
                let res = correlate(&req, &p.model, method.as_ref(), &opts(cfg))?;
                (grid, res, reference)
            }
        };
        let mut out = Artifacts::default();
        out.add_file("results.csv", series_csv(&res)?);
        out.add_file("reference.csv", reference_csv(&grid, &reference)?);
        out.record_run("run", &res);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_every_scenario() {
        let r = ScenarioRegistry::default();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            vec!["benchmark", "custom", "decay-element", "fluorescence-g1", "gisin-compare"]
        );
    }

    #[test]
    fn plus_state_is_normalized() {
        assert!(plus().is_normalized());
        assert_eq!(two_level::ground().dim(), 2);
    }
}
