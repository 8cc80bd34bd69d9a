use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn l96(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l96")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, body: &str) -> String {
    let p = dir.join("spec.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SIMULATE: &str = r#"
kind = "simulate"

[config]
n = 9
epsilon = 0.5
sigma = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
dt = 0.001
seed = 4

[simulate]
horizon = 1.0
thin = 100
"#;

#[test]
fn simulate_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SIMULATE);
    let out = dir.path().join("run");
    let o = l96(&["simulate", "--config", &spec, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t,u_0,u_1"));
    assert_eq!(lines.count(), 11);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "success");
    assert_eq!(m["spec"]["config"]["seed"], 4);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SIMULATE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(l96(&["simulate", "--config", &spec, "--out", a.to_str().unwrap(), "--seed", "9"]).status.code(), Some(0));
    let manifest = a.join("manifest.json");
    let o = l96(&["simulate", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap(), "--threads", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(b.join("trajectory.csv")).unwrap());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &SIMULATE.replace("thin = 100", "thin = 100\nthinn = 3"));
    let o = l96(&["simulate", "--config", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn wrong_kind_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SIMULATE);
    let o = l96(&["lyapunov", "--config", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn cap_verify_prints_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("basis.csv");
    let o = l96(&[
        "cap-verify",
        "--N",
        "6",
        "--depth-cap",
        "12",
        "--generators",
        "all",
        "--out",
        dir.path().join("cap").to_str().unwrap(),
        "--emit-basis",
        basis.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["N"], 6);
    assert_eq!(v["expected"], 15);
    assert_eq!(v["generated"], false);
    assert!(v["dim"].as_u64().unwrap() < 15);
    // not generating sl is a threshold failure, not a crash
    assert_eq!(o.status.code(), Some(2));
    let rows = fs::read_to_string(basis).unwrap();
    assert_eq!(rows.lines().count() as u64, v["dim"].as_u64().unwrap());
    assert!(rows.lines().all(|l| l.split(',').count() == 16 && l.split(',').all(|q| q.contains('/'))));
}

#[test]
fn cap_verify_rejects_n_not_multiple_of_three() {
    let o = l96(&["cap-verify", "--N", "7"]);
    assert_eq!(o.status.code(), Some(4));
}
