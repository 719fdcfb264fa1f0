use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trivortex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn simulate_to(dir: &Path, tag: &str, extra: &[&str]) -> (Output, String, Value) {
    let csv = dir.join(format!("{tag}.csv"));
    let json = dir.join(format!("{tag}.json"));
    let mut args = vec![
        "simulate",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        json.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    let text = fs::read_to_string(&csv).unwrap_or_default();
    let summary = fs::read_to_string(&json)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or(Value::Null);
    (out, text, summary)
}

#[test]
fn preset_run_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv, summary) = simulate_to(dir.path(), "r-", &["--preset", "r-", "--t-max", "500"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let mut lines = csv.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 19);
    assert_eq!(header[0], "t");
    assert_eq!(header[16], "gamma");
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 19);
        let v = |i: usize| f[i].parse::<f64>().unwrap();
        assert!((v(11) + v(12) + v(13) - 1.0).abs() < 1e-12);
        assert!(matches!(f[16], "1" | "-1" | "0"));
        rows += 1;
    }
    assert!(rows > 10);

    assert_eq!(summary["run_id"], "r-");
    assert_eq!(summary["prediction"]["type"], "I");
    assert_eq!(summary["report"]["observed_type"], "I");
    assert_eq!(summary["report"]["converged"], true);
    assert_eq!(summary["report"]["crossing_edges"][0], "Q3Q1");
    assert_eq!(summary["valid"], true);
    assert!(summary["invariant_drift"]["ibar_rel"].as_f64().unwrap() < 1e-8);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--R", "0.30,0.33,0.37", "--t-max", "20", "--samples", "200"];
    let (_, a, _) = simulate_to(dir.path(), "a", &args);
    let (_, b, _) = simulate_to(dir.path(), "b", &args);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 201);
}

#[test]
fn sides_are_rescaled_to_unit_perimeter() {
    let dir = tempfile::tempdir().unwrap();
    let (_, csv, summary) = simulate_to(dir.path(), "s", &["--R", "3,3.3,3.7", "--t-max", "1"]);
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((first[10] - 1.0).abs() < 1e-12);
    let r = summary["initial"]["R"].as_array().unwrap();
    assert!((r[0].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn short_horizon_exits_unconverged() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _, summary) = simulate_to(dir.path(), "u", &["--preset", "r+", "--t-max", "0.1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(summary["report"]["converged"], false);
    assert_eq!(summary["report"]["termination"], "time-limit");
}

#[test]
fn clockwise_offset_start() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _, summary) =
        simulate_to(dir.path(), "cw", &["--ibar", "0.7", "--caly", "-0.005", "--gamma", "-1", "--t-max", "500"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary["prediction"]["type"], "I");
    assert_eq!(summary["report"]["observed_type"], "I");
    assert_eq!(summary["report"]["final_branch"], "Q4E");
}

#[test]
fn points_reports_the_critical_set() {
    let out = run(&["points", "--k1", "2", "--k2", "1"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["E", "Q4", "Q5", "Q6", "S4", "beta4", "beta5", "I4", "I5", "I6", "nu_roots"] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert!((v["Q4"][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((v["Q6"][2].as_f64().unwrap() - 0.5).abs() < 1e-15);
    for (j, e) in v["E"].as_array().unwrap().iter().enumerate() {
        assert!((e.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15, "E[{j}]");
    }
    let i4 = v["I4"].as_f64().unwrap();
    let i5 = v["I5"].as_f64().unwrap();
    assert!(i5 < i4 && i4 < 1.0);
}

#[test]
fn equal_strength_curve_is_symmetric() {
    let out = run(&["curve", "--k1", "1", "--k2", "1", "--samples", "64"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,alpha,beta"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 64);
    for r in &rows {
        let (a, b) = (r[3], r[4]);
        // with k1 = k2 the conic is even in alpha, so (-alpha, beta) lies on it too
        let conic = 3.0 * a * a - 3.0 * b * b - 2.0 * b + 1.0;
        assert!(conic.abs() < 1e-12, "{r:?}");
    }
    assert!(rows.iter().any(|r| r[3] > 0.0) && rows.iter().any(|r| r[3] < 0.0));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["simulate"])), 64);
    assert_eq!(code(&run(&["simulate", "--preset", "r-", "--gamma", "2"])), 64);
    assert_eq!(code(&run(&["simulate", "--preset", "zz"])), 64);
    assert_eq!(code(&run(&["simulate", "--R", "0.3,0.3"])), 64);
    assert_eq!(code(&run(&["simulate", "--preset", "r-", "--rel-tol", "-1"])), 64);
    assert_eq!(code(&run(&["curve", "--samples", "1"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn bad_data_exits_65() {
    assert_eq!(code(&run(&["points", "--k1", "0.5", "--k2", "1"])), 65);
    assert_eq!(code(&run(&["simulate", "--R", "1,1,3"])), 65);
    assert_eq!(code(&run(&["simulate", "--ibar", "1.3", "--caly", "0.005"])), 65);
}

#[test]
fn unwritable_output_exits_74() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    assert_eq!(code(&run(&["curve", "--out", bad.to_str().unwrap()])), 74);
}
