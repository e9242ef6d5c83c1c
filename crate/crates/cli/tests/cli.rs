use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{Map, Value};
use wres_verify::registry::{SideValue, Setup};
use wres_verify::{registry, run_case, run_cases, Config, RunOptions, VerificationReport, VerifyError};

/// Coarse numerics that keep every case to a few seconds.
const FAST: &str = r#"{"numerics": {"x_grid": 4, "spectral_grid": 24, "fit_window": [0.1, 1.0]}}"#;

fn wres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wres")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn reports(out: &Output) -> Vec<Value> {
    serde_json::from_slice::<Value>(&out.stdout).unwrap().as_array().unwrap().clone()
}

#[test]
fn list_names_every_case() {
    let out = wres(&["verify", "--list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for c in registry() {
        assert!(text.contains(c.id), "{} missing", c.id);
    }
}

#[test]
fn case_filter_runs_exactly_one_case() {
    let out = wres(&["verify", "--case", "eq24-flat-t2"]);
    assert_eq!(code(&out), 0);
    let r = reports(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["case"], "eq24-flat-t2");
    assert_eq!(r[0]["pass"], true);
    for key in ["lhs", "rhs", "abs_err", "rel_err", "tol", "runtime_seconds", "parameters", "diagnostics"] {
        assert!(r[0].get(key).is_some(), "report lacks {key}");
    }
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("PASS eq24-flat-t2"));
}

#[test]
fn failing_case_exits_one() {
    // No double comes within 1e-300 of 2π relative.
    let out = wres(&["verify", "--case", "eq24-flat-t2", "--tol", "1e-300"]);
    assert_eq!(code(&out), 1);
    assert_eq!(reports(&out)[0]["pass"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&wres(&["verify", "--case", "no-such-case"])), 2);
    assert_eq!(code(&wres(&["verify", "--case", "eq24-flat-t2", "--workers", "0"])), 2);
    assert_eq!(code(&wres(&["verify", "--config", "/nonexistent/config.json"])), 2);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [
        (r#"{"numerics": {"x_grid": "eight"}}"#, "numerics.x_grid"),
        (r#"{"numerics": {"jet_order": 4, "bogus": 1}}"#, "numerics"),
        (r#"{"operator": {"form": "lichnerowicz", "rank": "four"}}"#, "operator"),
    ] {
        let path = write_config(dir.path(), text);
        let out = wres(&["verify", "--case", "eq24-flat-t2", "--config", &path]);
        assert_eq!(code(&out), 2, "{text}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(field), "{text}: {err}");
    }
    let path = write_config(dir.path(), r#"{"numerics": {"symbol_cutoff": -1}}"#);
    let out = wres(&["verify", "--case", "eq24-flat-t4", "--config", &path]);
    assert_eq!(code(&out), 1);
    assert!(reports(&out)[0]["diagnostics"]["error"].as_str().unwrap().contains("symbol_cutoff"));
}

#[test]
fn gamma_mutation_fails_eq25() {
    let out = wres(&["verify", "--case", "eq25-conformal-t4", "--mutation", "gamma-shift"]);
    assert_eq!(code(&out), 1);
    let r = &reports(&out)[0];
    // Γ(2) becomes Γ(3) = 2, so the sides differ by a factor of two.
    assert!((r["rel_err"].as_f64().unwrap() - 0.5).abs() < 1e-6, "{r}");
}

#[test]
fn spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s2.csv");
    let out = wres(&["spectrum", "--source", "sphere-2", "--cutoff", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&path).unwrap(), "eigenvalue,multiplicity\n0.0,1\n2.0,3\n6.0,5\n");
    let out = wres(&["spectrum", "--source", "flat-t2", "--cutoff", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "eigenvalue,multiplicity\n0.0,1\n1.0,4\n");
}

#[test]
fn residue_and_heat_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), r#"{"numerics": {"power": 2, "x_grid": 4}}"#);
    let out = wres(&["residue", "--config", &path]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let res = v["residue"].as_f64().unwrap();
    assert!((res - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-10);
    assert_eq!(v["valid"], true);
    let out = wres(&["heat", "--config", &path]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    // a₀ of the flat 4-torus: (2π)⁴/(4π)² = π².
    assert!((v["a0"].as_f64().unwrap() - std::f64::consts::PI.powi(2)).abs() < 1e-10);
    assert_eq!(v["a2"].as_f64().unwrap(), 0.0);
}

fn without_runtime(reports: &[VerificationReport]) -> Vec<Value> {
    reports
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).unwrap();
            v.as_object_mut().unwrap().remove("runtime_seconds");
            v
        })
        .collect()
}

#[test]
fn reports_are_deterministic_and_in_registry_order() {
    let config = Config::from_json(FAST).unwrap();
    let cases = registry();
    let serial = RunOptions {
        workers: Some(1),
        ..RunOptions::default()
    };
    let parallel = RunOptions {
        workers: Some(3),
        ..RunOptions::default()
    };
    let a = run_cases(&cases, &config, &serial).unwrap();
    let b = run_cases(&cases, &config, &parallel).unwrap();
    let ids: Vec<&str> = a.iter().map(|r| r.case.as_str()).collect();
    assert_eq!(ids, cases.iter().map(|c| c.id).collect::<Vec<_>>());
    assert_eq!(without_runtime(&a), without_runtime(&b));
}

fn double(_: &Setup) -> Result<SideValue, VerifyError> {
    Ok(SideValue {
        value: 12345.0,
        scale: 1.0,
        diagnostics: Map::new(),
    })
}

#[test]
fn sides_are_independent() {
    // Replacing one side by a test double leaves the other bit-identical.
    let config = Config::from_json(FAST).unwrap();
    let opts = RunOptions::default();
    for case in registry() {
        let full = run_case(&case, &config, &opts);
        let (lhs, rhs) = (full.lhs.unwrap(), full.rhs.unwrap());
        let mut only_lhs = case;
        only_lhs.rhs = double;
        only_lhs.checks = None;
        let mut only_rhs = case;
        only_rhs.lhs = double;
        only_rhs.checks = None;
        assert_eq!(run_case(&only_lhs, &config, &opts).lhs.unwrap().to_bits(), lhs.to_bits(), "{}", case.id);
        assert_eq!(run_case(&only_rhs, &config, &opts).rhs.unwrap().to_bits(), rhs.to_bits(), "{}", case.id);
    }
}
