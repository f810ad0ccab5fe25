use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nclim_core::sweeps::{read_csv, Status, CSV_HEADER};

fn nclim(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nclim"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n.to_string());
    }
    cmd.output().expect("nclim runs")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn shipped(name: &str) -> String {
    scenarios().join(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn limit_prints_the_closed_form() {
    let out = nclim(&["limit", "--scenario", &shipped("siso_nmp_unstable.json")], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["j1"].as_f64().unwrap() - 0.04).abs() < 1e-12);
    assert!(v.get("j_oracle").is_none());
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"plant": {"kind": "tf", "num": [1], "den": [-1, 1]}}"#);
    let out = nclim(&["limit", "--scenario", &bad], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("channels: required, expected 1 entries"));
    assert_eq!(nclim(&["limit"], None).status.code(), Some(1));
    assert_eq!(nclim(&["sweep", "--preset", "nope"], None).status.code(), Some(1));
}

#[test]
fn divergent_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "collide.json",
        r#"{"plant": {"kind": "pz", "zeros": [{"re": 2}], "poles": [{"re": -1}, {"re": 2}]}, "channels": [{"sigma_n": 0.1}]}"#,
    );
    assert_eq!(nclim(&["limit", "--scenario", &sc], None).status.code(), Some(2));
    let sw = write(dir.path(), "sw.json", r#"{"parameter": "plant.zeros[0].re", "values": [2.0]}"#);
    let out = nclim(&["sweep", "--scenario", &sc, "--sweep", &sw], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes() {
    let out = nclim(&["check", "--json"], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
    assert_eq!(v["suites"].as_array().unwrap().len(), 4);
}

#[test]
fn factorize_dumps_directions() {
    let out = nclim(&["factorize", "--scenario", &shipped("mimo_coupled.json")], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["eta", "omega", "gamma"] {
        assert_eq!(v[key].as_array().unwrap().len(), 1, "{key}");
    }
    assert!(v["power"]["r"]["psi"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_csv_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for threads in [1, 4] {
        let out = dir.path().join(format!("fig5_{threads}.csv"));
        let o = nclim(&["sweep", "--preset", "fig5", "--out", out.to_str().unwrap()], Some(threads));
        assert_eq!(o.status.code(), Some(0));
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let text = String::from_utf8(bytes[0].clone()).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert!(!text.contains('\r'));
    let rows = read_csv(&bytes[0][..]).unwrap();
    assert_eq!(rows.len(), 56);
    assert!(rows.iter().any(|r| r.param == 2.0 && r.status == Status::Diverged));
}

#[test]
fn scenario_sweep_with_file() {
    let out = nclim(
        &["sweep", "--scenario", &shipped("siso_nmp_unstable.json"), "--sweep", &shipped("cutoff_sweep.json")],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 13);
    assert!(rows.windows(2).all(|w| w[1].j_total < w[0].j_total));
}
