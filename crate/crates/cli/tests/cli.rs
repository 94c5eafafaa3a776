use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn metricgeo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metricgeo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn corpus_emit_then_lip() {
    let dir = tempfile::tempdir().unwrap();
    let out = metricgeo(&["corpus", "--name", "halfline", "--n-max", "10", "--emit", "space.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = metricgeo(&["lip", "--space", "space.json", "--field", "g"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let sup = json(&out)["sup_lip"].as_f64().unwrap();
    assert!((sup - 1.0).abs() <= 0.02, "sup Lip {sup}");
}

#[test]
fn parallel_edges_modulus() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "parallel_edges_k3.json",
        r#"{"graph":{"kind":"graph","edges":[[0,1,1.0],[0,1,1.0],[0,1,1.0]]},
            "family":{"kind":"connecting","data":{"sources":[0],"targets":[1]}}}"#,
    );
    let out = metricgeo(&["modulus", "--instance", "parallel_edges_k3.json", "--p", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let value = json(&out)["value"].as_f64().unwrap();
    assert!((value - 3.0).abs() < 1e-6);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "{\"kind\": \"matrix\",");
    let out = metricgeo(&["verify-metric", "--space", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let out = metricgeo(&["verify-metric", "--space", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = metricgeo(&["modulus", "--instance", "bad.json", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    write(dir.path(), "m.json", r#"{"kind":"matrix","distances":[[0,1],[1,0]]}"#);
    let out = metricgeo(&["lip", "--space", "m.json", "--field", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn metric_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"kind":"matrix","distances":[[0,1,5],[1,0,1],[5,1,0]]}"#);
    let out = metricgeo(&["verify-metric", "--space", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], Value::Bool(false));
}

#[test]
fn upper_gradient_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "path.json",
        r#"{"kind":"graph","edges":[[0,1,1.0],[1,2,1.0]],"fields":{"f":[0.0,1.0,3.0]}}"#,
    );
    write(dir.path(), "curves.json", "[[0,1,2],[2,1]]");
    let ok = metricgeo(
        &["sobolev", "upper-gradient", "--space", "path.json", "--field", "f", "--curves", "curves.json"],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0));
    write(dir.path(), "g.json", r#"{"location":"edge","values":[1.0,1.0]}"#);
    let bad = metricgeo(
        &[
            "sobolev",
            "upper-gradient",
            "--space",
            "path.json",
            "--field",
            "f",
            "--curves",
            "curves.json",
            "--gradient",
            "g.json",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["violations"].as_array().unwrap().len(), 2);
}

#[test]
fn csv_uses_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"kind":"matrix","distances":[[0,0.1],[0.1,0]],"fields":{"f":[0,0.3]}}"#);
    let out = metricgeo(
        &["lip", "--space", "m.json", "--field", "f", "--schedule", "1:0.5:0.2", "--format", "csv"],
        dir.path(),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("point,r,D_r,S_r,value,converged,isolated"));
    assert!(lines.next().unwrap().starts_with("0,1.0000000000000000e0,2.9999999999999999e-1,"));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = metricgeo(&["corpus", "--name", "ball_sequence", "--n-max", "3", "--emit", "balls.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let run = |threads: &str, file: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_metricgeo"))
            .args(["sobolev", "poincare", "--space", "balls.json", "--seed", "7", "--random", "5", "--out", file])
            .env("METRICGEO_THREADS", threads)
            .current_dir(dir.path())
            .status()
            .unwrap();
        assert!(status.code().is_some_and(|c| c != 1));
        std::fs::read(dir.path().join(file)).unwrap()
    };
    let a = run("1", "a.json");
    let b = run("4", "b.json");
    assert_eq!(a, b);
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["seed"], Value::from(7));
}

#[test]
fn corpus_lists_spaces() {
    let dir = tempfile::tempdir().unwrap();
    let out = metricgeo(&["corpus"], dir.path());
    let spaces = json(&out)["spaces"].as_array().unwrap().len();
    assert_eq!(spaces, 7);
}
