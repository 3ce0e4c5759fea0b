use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir-rect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["vartheta-table", "--x-min", "-3", "--x-max", "3", "--steps", "13", "--rho", "0.7", "1", "1.5"];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let single = Command::new(env!("CARGO_BIN_EXE_casimir-rect"))
        .args(args)
        .env("CASIMIR_RECT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(first.as_bytes(), single.stdout.as_slice());
}

#[test]
fn csv_and_json_agree() {
    let args = ["sigma", "--x", "-2", "-0.5", "0", "0.5", "2", "--rho", "1", "2"];
    let csv = stdout(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&json_args)).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(doc["columns"], serde_json::json!(header));
    let rows = doc["rows"].as_array().unwrap();
    let csv_rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), csv_rows.len());
    for (line, row) in csv_rows.iter().zip(rows) {
        for (cell, value) in line.split(',').zip(row.as_array().unwrap()) {
            let a: f64 = cell.parse().unwrap();
            assert_eq!(a.to_bits(), value.as_f64().unwrap().to_bits(), "{cell} vs {value}");
        }
    }
    assert_eq!(doc["meta"]["config"]["command"]["name"], "sigma");
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    let args = ["zeros", "--x", "0.5", "--count", "5"];
    let direct = stdout(&args);
    let mut with_file = args.to_vec();
    let p = path.to_str().unwrap();
    with_file.extend(["--output", p]);
    assert_eq!(stdout(&with_file), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
}

#[test]
fn zeros_at_critical_point() {
    let text = stdout(&["zeros", "--x", "0", "--count", "3"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mu,phi,phi_sq,gamma");
    for (k, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], (k + 1).to_string());
        let phi: f64 = cells[1].parse().unwrap();
        let expected = std::f64::consts::PI * (k as f64 + 0.5);
        assert!((phi - expected).abs() < 1e-12, "{phi} vs {expected}");
    }
}

#[test]
fn rho0_line() {
    assert_eq!(stdout(&["rho0"]), "0.523521700018\n");
}

#[test]
fn theta_table_zero_row() {
    let text = stdout(&["theta-table", "--x-min", "-0.5", "--x-max", "0.5", "--steps", "3", "--rho", "2"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2], "0.0000000000000000e0,2.0000000000000000e0,,,divergent");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["zeros", "--x", "nan"],
        vec!["theta-table", "--x-min", "1", "--x-max", "-1", "--steps", "3"],
        vec!["critical", "--rho", "-1"],
        vec!["frobnicate"],
        vec!["zeros"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.csv");
    let out = run(&["rho0", "--output", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let out = run(&["weights", "--x", "0.5", "--count", "2", "--max-depth", "1", "--rel-tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu=1"));
}

#[test]
fn help_and_version_exit_zero() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}
