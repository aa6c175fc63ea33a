//! End-to-end tests for the `tcq` binary: artifact layout, determinism,
//! exit-code contract and the stdout summaries.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcq"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    let body = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&body).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

#[test]
fn no_subcommand_is_a_usage_error() {
    let out = tcq(&[]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn design_writes_schedule_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("design");
    let out = tcq(&["design", "cz2", "--h1", "0.01", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("design CZ2"), "stdout: {text}");
    assert!(text.contains("Omega1 = 2.863703305156"), "stdout: {text}");

    let schedule = read_json(&out_dir.join("schedule.json"));
    assert_eq!(schedule["schema"], "tcq/1");
    assert_eq!(schedule["target"], "CZ2");
    let segments = schedule["segments"].as_array().unwrap();
    assert_eq!(segments.len(), 1);
    let seg = &segments[0];
    assert_eq!(seg["drive"], 1);
    let omega = seg["omega"].as_f64().unwrap();
    assert!((omega - (1.0 + 2.0_f64.sqrt() + 6.0_f64.sqrt() - 2.0)).abs() < 1e-12);
    // Quarter rotation at the two-atom controlled-phase Rabi rate.
    let rate = (6.0_f64.sqrt() - 2.0_f64.sqrt()) / 24.0 * 0.01;
    let duration = seg["duration"].as_f64().unwrap();
    assert!((duration - std::f64::consts::PI / (2.0 * rate)).abs() < 1e-6);

    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["schema"], "tcq/1");
    assert_eq!(manifest["command"], "design CZ2");
    assert_eq!(manifest["outputs"], serde_json::json!(["schedule.json"]));
    assert!(manifest["library_version"].as_str().is_some_and(|v| !v.is_empty()));
    assert!(manifest["wall_time_ms"].as_u64().is_some());
}

#[test]
fn design_data_artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&d1, &d2] {
        let out = tcq(&["design", "ccnot", "--h1", "0.02", "--out", d.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    }
    let a = std::fs::read(d1.join("schedule.json")).unwrap();
    let b = std::fs::read(d2.join("schedule.json")).unwrap();
    assert_eq!(a, b, "schedule bytes should not depend on the run");
}

#[test]
fn design_rejects_unknown_gate() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bad");
    let out = tcq(&["design", "wonky", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("wonky"), "stderr: {}", stderr(&out));
    assert!(!out_dir.join("schedule.json").exists());
}

#[test]
fn verify_gates_scope_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("verify");
    let out = tcq(&["verify", "gates", "--seed", "11", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("check "), "stdout: {text}");
    assert!(text.contains("checks passed"), "stdout: {text}");
    assert!(!text.contains("FAIL"), "stdout: {text}");

    let report = read_json(&out_dir.join("verify_report.json"));
    assert_eq!(report["schema"], "tcq/1");
    assert_eq!(report["scope"], "gates");
    assert_eq!(report["seed"], 11);
    assert_eq!(report["all_passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for check in checks {
        assert!(check["name"].as_str().is_some());
        assert_eq!(check["passed"], true);
        assert!(check["max_dev"].as_f64().unwrap() <= check["tolerance"].as_f64().unwrap());
    }
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["outputs"], serde_json::json!(["verify_report.json"]));
}

#[test]
fn verify_rejects_unknown_scope() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcq(&["verify", "everything", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn simulate_writes_gate_report() {
    let dir = tempfile::tempdir().unwrap();
    let design_dir = dir.path().join("design");
    let out = tcq(&["design", "cz2", "--h1", "0.1", "--out", design_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let sim_dir = dir.path().join("sim");
    let schedule = design_dir.join("schedule.json");
    let out = tcq(&[
        "simulate",
        schedule.to_str().unwrap(),
        "--nmax",
        "8",
        "--buffer",
        "2",
        "--step",
        "5e-3",
        "--out",
        sim_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("simulate CZ2: fidelity ="), "stdout: {}", stdout(&out));

    let report = read_json(&sim_dir.join("gate_report.json"));
    assert_eq!(report["schema"], "tcq/1");
    assert_eq!(report["target"], "CZ2");
    // At this strong drive the full model parks well short of the ideal
    // quarter rotation; the plateau is a physics regression value.
    let fidelity = report["fidelity"].as_f64().unwrap();
    assert!((0.3..0.4).contains(&fidelity), "fidelity {fidelity}");
    let leakage = report["leakage"].as_f64().unwrap();
    assert!((0.1..0.2).contains(&leakage), "leakage {leakage}");
    assert!(report["diagnostics"]["n_steps_total"].as_u64().unwrap() > 70_000);
    let manifest = read_json(&sim_dir.join("manifest.json"));
    assert_eq!(manifest["outputs"], serde_json::json!(["gate_report.json"]));
}

#[test]
fn simulate_rejects_corrupt_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schedule.json");
    std::fs::write(&path, "{ this is not json").unwrap();
    let out = tcq(&["simulate", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("parsing schedule"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_oversized_step_is_a_computational_failure() {
    let dir = tempfile::tempdir().unwrap();
    let design_dir = dir.path().join("design");
    let out = tcq(&["design", "cz2", "--h1", "0.1", "--out", design_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);

    let schedule = design_dir.join("schedule.json");
    let out = tcq(&[
        "simulate",
        schedule.to_str().unwrap(),
        "--step",
        "2.0",
        "--out",
        dir.path().join("sim").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("too large"), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_requires_two_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcq(&[
        "sweep",
        "cz2",
        "--h-list",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("at least two"), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_writes_csv_rows_and_per_amplitude_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = tcq(&[
        "sweep",
        "cz2",
        "--h-list",
        "0.1,0.08",
        "--nmax",
        "6",
        "--buffer",
        "1",
        "--step",
        "5e-3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("sweep CZ2: h/g = 0.1"), "stdout: {text}");
    assert!(text.contains("monotone"), "stdout: {text}");

    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "h_over_g,fidelity,leakage,gate_time");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.1,"), "rows keep input order: {csv}");
    assert!(lines[2].starts_with("0.08,"), "rows keep input order: {csv}");

    // Every CSV cell must round-trip to the JSON value exactly.
    let summary = read_json(&out_dir.join("sweep.json"));
    assert_eq!(summary["schema"], "tcq/1");
    assert_eq!(summary["gate"], "CZ2");
    let rows = summary["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (line, row) in lines[1..].iter().zip(rows) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[0], row["h_over_g"].as_f64().unwrap());
        assert_eq!(cells[1], row["fidelity"].as_f64().unwrap());
        assert_eq!(cells[2], row["leakage"].as_f64().unwrap());
        assert_eq!(cells[3], row["gate_time"].as_f64().unwrap());
    }

    for i in 0..2 {
        let report = read_json(&out_dir.join(format!("report_{i}.json")));
        assert_eq!(report["target"], "CZ2");
        assert!(report["fidelity"].as_f64().is_some());
    }
    let manifest = read_json(&out_dir.join("manifest.json"));
    let outputs = manifest["outputs"].as_array().unwrap();
    for name in ["sweep.csv", "sweep.json", "report_0.json", "report_1.json"] {
        assert!(outputs.iter().any(|o| o == name), "missing {name}: {outputs:?}");
    }
    assert!(!outputs.iter().any(|o| o == "manifest.json"));
}

#[test]
fn ccnot_sweep_reports_both_pulse_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = tcq(&[
        "sweep",
        "ccnot",
        "--h-list",
        "1.0,0.8",
        "--nmax",
        "6",
        "--buffer",
        "2",
        "--step",
        "5e-3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let report = read_json(&out_dir.join("report_0.json"));
    assert_eq!(report["target"], "CCNOT");
    let segments = report["diagnostics"]["segments"].as_array().unwrap();
    assert_eq!(segments.len(), 2, "two half pulses");
    for seg in segments {
        assert!(seg["duration"].as_f64().unwrap() > 0.0);
    }
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["config"]["expected_dominant_pair"], serde_json::json!([5, 6]));
}
