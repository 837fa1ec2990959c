use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn hodge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hodge")).args(args).output().expect("spawn hodge")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn grid(n: usize, m: usize, p: usize) -> Value {
    json!({"N": n, "L": 6.283185307179586, "M": m, "X_max": 12, "P": p})
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn zero_data_gives_zero_solution() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "c.json", &json!({"grid": grid(1, 8, 129), "problem": {"degree": 1, "data": {"generator": "zero"}}}));
    let out = d.path().join("out");
    let o = hodge(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["residual_l2"], json!(0.0));
    assert!(out.join("solution.bin").exists());
}

#[test]
fn manufactured_solution_is_recovered() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "c.json",
        &json!({"grid": {"N": 2, "L": 6.283185307179586, "M": 8, "X_max": 16, "P": 2049},
                "problem": {"degree": 1, "data": {"generator": "manufactured"}}, "seed": 3}),
    );
    let o = hodge(&["solve", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let err = report(d.path())["relative_error"].as_f64().unwrap();
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn odd_m_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "c.json", &json!({"grid": grid(1, 7, 129), "problem": {"data": {"generator": "zero"}}}));
    assert_eq!(code(&hodge(&["solve", "--config", &cfg, "--out", d.path().to_str().unwrap()])), 3);
}

#[test]
fn unknown_key_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "c.json", &json!({"grid": grid(1, 8, 129), "bogus": 1, "problem": {"data": {"generator": "zero"}}}));
    assert_eq!(code(&hodge(&["solve", "--config", &cfg])), 3);
}

#[test]
fn incompatible_zero_mode_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "c.json",
        &json!({"grid": grid(1, 8, 513),
                "problem": {"degree": 0, "kind": "dirichlet-type", "data": {"generator": "gaussian-bump", "project": false}}}),
    );
    let o = hodge(&["solve", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_symbols_passes_and_writes_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = hodge(&["verify", "symbols", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("verify_symbols.json")).unwrap()).unwrap();
    assert_eq!(s["pass"], json!(true));
    assert!(d.path().join("verify_symbols.csv").exists());
}

#[test]
fn verify_adjoint_fails_at_impossible_tolerance() {
    let d = tempfile::tempdir().unwrap();
    let base = json!({"grid": grid(1, 8, 2049), "problem": {"degree": 0, "data": {"generator": "zero"}}, "verify": {"cases": 4}});
    let ok = write_config(d.path(), "ok.json", &base);
    assert_eq!(code(&hodge(&["verify", "adjoint", "--config", &ok, "--out", d.path().to_str().unwrap()])), 0);
    let mut strict = base.clone();
    strict["tolerances"] = json!({"adjoint": 1e-30});
    let strict = write_config(d.path(), "strict.json", &strict);
    let o = hodge(&["verify", "adjoint", "--config", &strict, "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("failing case"));
}

#[test]
fn sweep_needs_two_values() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "c.json", &json!({"grid": grid(1, 8, 129), "problem": {"data": {"generator": "zero"}}}));
    assert_eq!(code(&hodge(&["sweep", "--param", "P", "--values", "129", "--config", &cfg])), 3);
}

#[test]
fn sweep_records_bad_points_and_continues() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "c.json", &json!({"grid": grid(1, 8, 129), "problem": {"degree": 1, "data": {"generator": "zero"}}}));
    let o = hodge(&["sweep", "--param", "M", "--values", "8,7,16", "--config", &cfg]);
    assert_eq!(code(&o), 1);
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "value,residual,bc_violation,estimate_ratio,truncation_estimate,wall_time,status");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",ok") && lines[3].ends_with(",ok"));
    assert!(lines[2].contains("error"));
}

#[test]
fn report_schema_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "c.json",
        &json!({"grid": grid(1, 8, 513),
                "problem": {"degree": 0, "kind": "neumann-type",
                            "data": {"generator": "band-limited-random", "amplitude": 1.0, "boundary": true}},
                "seed": 5}),
    );
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    for out in [&a, &b] {
        let o = hodge(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["report.json", "solution.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let r = report(&a);
    let keys: BTreeSet<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    let expected: BTreeSet<&str> = [
        "grid",
        "degree",
        "kind",
        "seed",
        "residual_l2",
        "relative_residual",
        "bc_violation",
        "moment_diagnostics",
        "per_mode_condition",
        "truncation_estimate",
        "relative_error",
        "estimate_ratio",
    ]
    .into_iter()
    .collect();
    assert_eq!(keys, expected);
}
