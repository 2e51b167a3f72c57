use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const DIRICHLET: &str = r#"{"u":[0,1,2],"a":[1,0.7,1.3],"k":[1,2,0.5],"d":[1,0.5],"u_D":3}"#;
const NEUMANN: &str = r#"{"u":[0,1],"a":[1,1],"k":[0.5,1],"d":[1],"b_N":-0.4}"#;

fn stefan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefan")).args(args).output().unwrap()
}

fn input(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_dirichlet_writes_solution() {
    let dir = TempDir::new().unwrap();
    let inp = input(&dir, "p.json", DIRICHLET);
    let out = dir.path().join("sol.json");
    let o = stefan(&["solve-dirichlet", "--in", s(&inp), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["xi"].as_array().unwrap().len(), 2);
    assert!(v["grad_norm"].as_f64().unwrap() <= 1e-10);
    assert!(v["energy"].is_f64());
    let segments = v["profile"]["segments"].as_array().unwrap();
    assert_eq!(segments.len(), 3);
    assert_eq!(segments[0]["outer"], "+inf");
}

#[test]
fn enumerate_reports_each_type_with_witness() {
    let dir = TempDir::new().unwrap();
    let inp = input(&dir, "p.json", NEUMANN);
    let o = stefan(&["enumerate", "--in", s(&inp)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let types = v["types"].as_array().unwrap();
    assert_eq!(types.len(), 2);
    for t in types {
        assert!(t["witness"]["lhs"].is_f64());
        assert!(t["status"].is_string());
    }
    assert_eq!(v["count"], 2);
}

#[test]
fn solve_neumann_single_type() {
    let dir = TempDir::new().unwrap();
    let inp = input(&dir, "p.json", NEUMANN);
    let o = stefan(&["solve-neumann", "--in", s(&inp), "--type", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 1);
    assert_eq!(v["status"], "exists");
    let o = stefan(&["solve-neumann", "--in", s(&inp), "--type", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sample_writes_rows_and_boundaries() {
    let dir = TempDir::new().unwrap();
    let inp = input(&dir, "p.json", DIRICHLET);
    let out = dir.path().join("prof.csv");
    let o = stefan(&["sample", "--in", s(&inp), "--t", "1.0", "--xmax", "10", "--n", "1000", "--out", s(&out)]);
    assert!(o.status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["x", "u"]);
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 1000);
    assert_eq!(rows[0], vec![0.0, 3.0]);
    assert_eq!(rows[999][0], 10.0);
    let b: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("prof.boundaries.json")).unwrap()).unwrap();
    assert_eq!(b["xi"].as_array().unwrap().len(), 2);
    assert_eq!(b["x"], b["xi"]);
}

#[test]
fn sample_in_similarity_variable() {
    let dir = TempDir::new().unwrap();
    let inp = input(&dir, "p.json", NEUMANN);
    let o = stefan(&["sample", "--in", s(&inp), "--xmax", "4", "--n", "5", "--type", "0"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("xi,u\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn validation_errors_exit_with_one_and_name_the_constraint() {
    let dir = TempDir::new().unwrap();
    let bad = input(&dir, "bad.json", r#"{"u":[0,1],"a":[1,-1],"k":[1,1],"d":[1],"u_D":0.5}"#);
    let o = stefan(&["solve-dirichlet", "--in", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("a[1] must be > 0"), "{err}");
    assert!(err.contains("u_D"), "{err}");

    let neither = input(&dir, "neither.json", r#"{"u":[0,1],"a":[1,1],"k":[1,1],"d":[1]}"#);
    assert_eq!(stefan(&["solve-dirichlet", "--in", s(&neither)]).status.code(), Some(1));
    let unknown = input(&dir, "unknown.json", r#"{"u":[0,1],"a":[1,1],"k":[1,1],"d":[1],"u_D":2,"x":1}"#);
    assert_eq!(stefan(&["solve-dirichlet", "--in", s(&unknown)]).status.code(), Some(1));
    assert_eq!(stefan(&["solve-dirichlet", "--in", "/nonexistent/p.json"]).status.code(), Some(1));
}

#[test]
fn verb_must_match_boundary_data() {
    let dir = TempDir::new().unwrap();
    let d = input(&dir, "d.json", DIRICHLET);
    let n = input(&dir, "n.json", NEUMANN);
    assert_eq!(stefan(&["enumerate", "--in", s(&d)]).status.code(), Some(1));
    assert_eq!(stefan(&["solve-dirichlet", "--in", s(&n)]).status.code(), Some(1));
}

#[test]
fn verify_passes_and_fails_with_exit_three() {
    let dir = TempDir::new().unwrap();
    let d = input(&dir, "d.json", DIRICHLET);
    let o = stefan(&["verify", "--in", s(&d), "--seed", "3"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    // Four cells cannot resolve the profile, so the oracle check fails.
    let o = stefan(&["verify", "--in", s(&d), "--oracle-cells", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["oracle_linf"].as_f64().unwrap() > 5e-2);
}

#[test]
fn oracle_reports_and_dumps_csv() {
    let dir = TempDir::new().unwrap();
    let n = input(&dir, "n.json", NEUMANN);
    let csv_path = dir.path().join("field.csv");
    let o = stefan(&["oracle", "--in", s(&n), "--cells", "200", "--csv", s(&csv_path)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["linf"].as_f64().unwrap() < 5e-2);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("x,u_fd,u_profile\n"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn log_level_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let d = input(&dir, "d.json", DIRICHLET);
    let quiet = stefan(&["solve-dirichlet", "--in", s(&d)]);
    assert!(quiet.stderr.is_empty());
    let loud = Command::new(env!("CARGO_BIN_EXE_stefan"))
        .args(["solve-dirichlet", "--in", s(&d)])
        .env("STEFAN_LOG", "debug")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&loud.stderr).contains("converged"));
}
