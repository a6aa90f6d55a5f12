use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qsd_cli::{validate, Overrides, ScenarioRegistry, EXIT_CONFIG};
use tempfile::TempDir;

fn simulate(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .output()
        .unwrap()
}

fn check(text: &str) -> Result<qsd_cli::RunConfig, Vec<String>> {
    validate(text, &Overrides::default(), &ScenarioRegistry::default())
}

fn rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = check(r#"{"scenario": "decay-element"}"#).unwrap();
    assert_eq!(cfg.dt, 1e-3);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.n_trajectories, Some(1000));
    assert_eq!(cfg.t_grid().len(), 40);
    assert!((cfg.t_grid()[39] - 4.0).abs() < 1e-15);
    let f = check(r#"{"scenario": "fluorescence-g1"}"#).unwrap();
    assert_eq!(f.warmup, Some(30.0));
    assert_eq!(f.omega, Some(10.0));
    assert_eq!(f.tau_grid()[0], 0.0);
}

#[test]
fn inapplicable_and_unknown_keys_are_rejected() {
    let errs = check(r#"{"scenario": "decay-element", "omega": 10}"#).unwrap_err();
    assert_eq!(errs, vec!["key `omega` does not apply to scenario `decay-element`"]);
    let errs = check(r#"{"scenario": "decay-element", "n_trajectorie": 10}"#).unwrap_err();
    assert_eq!(errs, vec!["unknown key `n_trajectorie`"]);
    assert!(check(r#"{"scenario": "nope"}"#).unwrap_err()[0].contains("unknown scenario"));
    assert!(check(r#"{"seed": 1}"#).unwrap_err()[0].contains("`scenario`"));
}

#[test]
fn nonpositive_step_is_rejected() {
    let errs = check(r#"{"scenario": "decay-element", "dt": 0}"#).unwrap_err();
    assert_eq!(errs, vec!["dt must be positive"]);
}

#[test]
fn every_problem_is_reported() {
    let errs = check(r#"{"scenario": "decay-element", "omega": 1, "seed": "x", "typo": 0}"#).unwrap_err();
    assert_eq!(errs.len(), 3, "{errs:?}");
}

#[test]
fn syntax_errors_carry_a_position() {
    let errs = check("{\n  \"scenario\": \"decay-element\",\n}").unwrap_err();
    assert!(errs[0].starts_with("line 3 column 1"), "{errs:?}");
}

#[test]
fn custom_requires_a_consistent_problem() {
    let base = r#""scenario": "custom", "model": {"builder": "decay"}, "observable": [[0, 0], [1, 0]]"#;
    assert!(check(&format!(r#"{{{base}, "phi0": [0, 1], "psi0": [1, 0]}}"#)).is_ok());
    assert!(check(&format!(r#"{{{base}, "b": [[0, 1], [0, 0]]}}"#)).is_ok());
    let errs = check(&format!(r#"{{{base}, "phi0": [0, 1], "psi0": [1, 1]}}"#)).unwrap_err();
    assert!(errs[0].contains("normalized"), "{errs:?}");
    let errs = check(&format!(r#"{{{base}, "phi0": [0, 1, 0], "psi0": [1, 0]}}"#)).unwrap_err();
    assert!(errs[0].contains("dimension"), "{errs:?}");
    let errs = check(&format!(r#"{{{base}, "b": [[1, 0], [0, 1]], "initial": [1, 0], "warmup": 3}}"#)).unwrap_err();
    assert!(errs[0].contains("warmup"), "{errs:?}");
    let errs = check(&format!(r#"{{{base}, "phi0": [0, 1], "psi0": [1, 0], "tau_max": 2}}"#)).unwrap_err();
    assert!(errs[0].contains("tau_max"), "{errs:?}");
}

#[test]
fn bad_configs_exit_2_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    for text in ["", "{not json", "[]", r#"{"scenario": "decay-element", "dt": -1}"#] {
        let o = simulate(dir.path(), text, &["--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(EXIT_CONFIG), "{text}");
        assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
        assert!(!out.exists());
    }
}

#[test]
fn missing_config_file_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(["--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn decay_run_writes_grid_length_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = simulate(
        dir.path(),
        r#"{"scenario": "decay-element", "n_trajectories": 50, "t_nodes": 8}"#,
        &["--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&out.join("results.csv")), 8);
    assert_eq!(rows(&out.join("reference.csv")), 8);
    let header = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(header.starts_with("grid,mean_re,mean_im,std_error\n"));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 0);
    assert_eq!(meta["dt"], 1e-3);
    assert_eq!(meta["n"], 50);
    assert_eq!(meta["config"]["t_max"], 4.0);
    assert!(meta["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    let timing: serde_json::Value = serde_json::from_slice(&fs::read(out.join("timing.json")).unwrap()).unwrap();
    assert!(timing["run"]["wall_time_seconds"].as_f64().unwrap() > 0.0);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"scenario": "fluorescence-g1", "n_trajectories": 40, "warmup": 2, "tau_nodes": 6}"#;
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = simulate(dir.path(), config, &["--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success());
        outputs.push(out);
    }
    for name in ["results.csv", "reference.csv", "metadata.json"] {
        let first = fs::read(outputs[0].join(name)).unwrap();
        for other in &outputs[1..] {
            assert_eq!(first, fs::read(other.join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn flags_override_the_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = simulate(
        dir.path(),
        r#"{"scenario": "decay-element", "n_trajectories": 5000, "seed": 3, "t_nodes": 4}"#,
        &["--out", out.to_str().unwrap(), "--n", "20", "--seed", "9", "--unraveling", "jump", "--dt", "0.002"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], 20);
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["dt"], 0.002);
    assert_eq!(meta["runs"]["run"]["method"], "jump");
}

#[test]
fn inapplicable_flag_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = simulate(dir.path(), r#"{"scenario": "benchmark"}"#, &["--n", "10"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_trajectories"));
}

#[test]
fn numerical_blow_up_exits_3_with_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    // A rate this large makes the jump probability per step exceed its bound.
    let o = simulate(
        dir.path(),
        r#"{"scenario": "decay-element", "unraveling": "jump", "gamma": 1000, "n_trajectories": 4, "t_nodes": 2}"#,
        &["--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(3));
    let report = out.join("failure.json");
    assert!(String::from_utf8_lossy(&o.stderr).contains(report.to_str().unwrap()));
    let body: serde_json::Value = serde_json::from_slice(&fs::read(report).unwrap()).unwrap();
    assert!(body["error"].as_str().unwrap().contains("jump probability"));
}

#[test]
fn gisin_compare_emits_every_step_size() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = simulate(
        dir.path(),
        r#"{"scenario": "gisin-compare", "n_trajectories": 20, "t_max": 0.5, "t_nodes": 5, "step_sizes": [0.01, 0.005]}"#,
        &["--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&out.join("results.csv")), 5);
    assert_eq!(rows(&out.join("gisin.csv")), 10);
    let reports: serde_json::Value = serde_json::from_slice(&fs::read(out.join("instability.json")).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert_eq!(reports[1]["step_size"], 0.005);
}

#[test]
fn benchmark_emits_one_row_per_method_and_size() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = simulate(
        dir.path(),
        r#"{"scenario": "benchmark", "n_list": [10, 20], "warmup": 1, "tau_nodes": 4}"#,
        &["--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("benchmark.csv")).unwrap();
    assert!(text.starts_with("method,n,rms_relative_error,est_std,wall_time_seconds,draws_total\n"));
    assert_eq!(rows(&out.join("benchmark.csv")), 4);
    assert_eq!(rows(&out.join("reference.csv")), 4);
}
