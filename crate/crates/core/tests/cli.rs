use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lattice-dp"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn audit_laplacian_spec() {
    let d = TempDir::new().unwrap();
    let f = write(
        d.path(),
        "lap.json",
        r#"{"family":"laplacian","params":{"mu":0,"lambda":8},"delta":1}"#,
    );
    let o = run(&["audit", f.to_str().unwrap(), "--m", "15"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["verdict"], "pure");
    assert_eq!(v["closed_form"]["epsilon"].as_f64().unwrap(), 2.0);
    // the exact sup is e^{15/8}
    assert!((v["epsilon"].as_f64().unwrap() - 15.0 / 8.0).abs() < 1e-12);
}

#[test]
fn audit_uniform_spec() {
    let d = TempDir::new().unwrap();
    let f = write(
        d.path(),
        "u.json",
        r#"{"family":"uniform","params":{"lo":0,"hi":9},"delta":1}"#,
    );
    let o = run(&["audit", f.to_str().unwrap(), "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["verdict"], "approx");
    assert_eq!(v["epsilon"].as_f64().unwrap(), 0.0);
    assert!((v["delta"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn audit_bad_pmf_names_field() {
    let d = TempDir::new().unwrap();
    let f = write(
        d.path(),
        "bad.json",
        r#"{"delta":1,"origin":0,"probs":[0.5,-0.1,0.6],"tail_mass":0}"#,
    );
    let o = run(&["audit", f.to_str().unwrap(), "--m", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("probs"));
}

#[test]
fn audit_not_dp_exits_two() {
    // a zero cell inside the band leaves the restricted ratio unbounded
    let d = TempDir::new().unwrap();
    let f = write(
        d.path(),
        "hole.json",
        r#"{"delta":1,"origin":-2,"probs":[0.25,0.25,0,0.25,0.25],"tail_mass":0}"#,
    );
    let o = run(&[
        "audit",
        f.to_str().unwrap(),
        "--m",
        "1",
        "--boundary-M",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("verdict,epsilon,delta,c_b\nnot_dp,"), "{text}");
    // without the band the per-shift split applies
    let o = run(&["audit", f.to_str().unwrap(), "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["verdict"], "approx");
}

#[test]
fn synthesize_and_audit_result() {
    let d = TempDir::new().unwrap();
    let input = write(d.path(), "x.json", r#"{"kind":"poisson","gamma":5}"#);
    let out = d.path().join("r.json");
    let csv = d.path().join("n.csv");
    let o = run(&[
        "synthesize",
        input.to_str().unwrap(),
        "--epsilon",
        "2",
        "--m",
        "15",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!v["staircase_segments"].as_array().unwrap().is_empty());
    assert!(v["privacy_check"]["epsilon"].as_f64().unwrap() <= 2.0 + 1e-6);
    for k in ["noise", "w0", "w1", "w2", "lp_status"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    let rows = fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("value,probability\n"));
    assert_eq!(rows.lines().count(), 422);

    let o = run(&[
        "audit",
        out.to_str().unwrap(),
        "--m",
        "15",
        "--exterior",
        "constant=1e-9",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let a = json_out(&o);
    assert_eq!(a["verdict"], "pure");
    assert!(a["epsilon"].as_f64().unwrap() <= 2.0 + 1e-6);
}

#[test]
fn synthesize_infeasible_exits_three() {
    let d = TempDir::new().unwrap();
    let input = write(d.path(), "x.json", r#"{"kind":"poisson","gamma":5}"#);
    let o = run(&[
        "synthesize",
        input.to_str().unwrap(),
        "--epsilon",
        "0.01",
        "--m",
        "15",
        "--p-min",
        "1e-4",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("phase-1 residual"));
    let o = run(&[
        "synthesize",
        input.to_str().unwrap(),
        "--epsilon",
        "0.01",
        "--m",
        "15",
        "--half-width",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_csv_and_json() {
    let d = TempDir::new().unwrap();
    let input = write(d.path(), "x.json", r#"{"kind":"poisson","gamma":5}"#);
    let o = run(&[
        "sweep",
        input.to_str().unwrap(),
        "--axis",
        "m",
        "--grid",
        "2,1",
        "--epsilon",
        "2",
        "--baselines",
        "laplacian",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis_value,mechanism,status,w0,w1,w2");
    assert!(lines[1].starts_with("1,laplacian,ok,"));
    assert!(lines[2].starts_with("1,optimal,ok,"));
    assert!(lines[4].starts_with("2,optimal,ok,"));
    let o = run(&[
        "sweep",
        input.to_str().unwrap(),
        "--axis",
        "m",
        "--grid",
        "1",
        "--format",
        "json",
    ]);
    let v = json_out(&o);
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn montecarlo_is_byte_identical() {
    let d = TempDir::new().unwrap();
    let input = write(d.path(), "x.json", r#"{"kind":"poisson","gamma":5}"#);
    let args = [
        "montecarlo",
        input.to_str().unwrap(),
        "--mechanisms",
        "laplacian,point",
        "--epsilon",
        "1",
        "--m",
        "2",
        "--runs",
        "100",
        "--n-draws",
        "500",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("mechanism,run,w0_empirical\nlaplacian,0,"));
    assert_eq!(text.lines().count(), 1 + 200 + 8);
}

#[test]
fn unknown_mechanism_and_missing_file() {
    let d = TempDir::new().unwrap();
    let input = write(d.path(), "x.json", r#"{"kind":"poisson","gamma":5}"#);
    let o = run(&[
        "montecarlo",
        input.to_str().unwrap(),
        "--mechanisms",
        "cauchy",
        "--epsilon",
        "1",
        "--m",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mechanism"));
    let o = run(&["audit", d.path().join("none.json").to_str().unwrap(), "--m", "1"]);
    assert_eq!(o.status.code(), Some(1));
}
