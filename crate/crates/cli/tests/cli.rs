use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn ssdkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssdkit"))
        .current_dir(dir)
        .env_remove("SSDKIT_BUDGET")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn helix_unit_pitch_passes() {
    let dir = tempdir().unwrap();
    let out = ssdkit(dir.path(), &["verify", "--suite", "helix", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let report = read_json(&dir.path().join("o/helix.json"));
    assert_eq!(report["suite"], "helix");
    assert_eq!(report["seed"], 42);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn helix_half_pitch_matches_golden_and_witness_is_negative() {
    let dir = tempdir().unwrap();
    let out = ssdkit(dir.path(), &["verify", "--suite", "helix", "--lambda", "0.5", "--out", "o"]);
    assert_eq!(code(&out), 1);
    let golden = include_str!("golden/helix_pitch_half.txt");
    assert_eq!(stdout(&out), golden);

    let report = read_json(&dir.path().join("o/helix.json"));
    let failed: Vec<&Value> = report["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    let w: Vec<Vec<f64>> = serde_json::from_value(failed[0]["witness"].clone()).unwrap();
    // q(b) = b1 b2 + b3²/2 on the swapped 3-space
    let d: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect();
    let q = d[0] * d[1] + 0.5 * d[2] * d[2];
    assert!(q < 0.0);
    assert!((-q - failed[0]["worst_residual"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn malformed_space_is_a_config_error() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"dim\": 2, \"pairing\": [[0, 1]").unwrap();
    let out = ssdkit(dir.path(), &["verify", "--suite", "ssd-axioms", "--space", "bad.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
}

#[test]
fn bad_flags_and_names_exit_two() {
    let dir = tempdir().unwrap();
    for args in [
        &["verify", "--suite", "no-such-suite"][..],
        &["verify", "--tol", "0"],
        &["verify", "--grid", "1:0:3"],
        &["verify", "--suite", "helix", "--set", "no-such-set"],
        &["conjugate"],
    ] {
        assert_eq!(code(&ssdkit(dir.path(), args)), 2, "{args:?}");
    }
}

#[test]
fn budget_env_caps_grids() {
    let dir = tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ssdkit"))
        .current_dir(dir.path())
        .env("SSDKIT_BUDGET", "100")
        .args(["verify", "--suite", "q-gap-bound"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn precondition_gate_refuses_singleton() {
    let dir = tempdir().unwrap();
    let out = ssdkit(dir.path(), &["verify", "--suite", "representability", "--set", "singleton"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not maximally"));
}

#[test]
fn report_on_empty_directory_is_missing_artifacts() {
    let dir = tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = ssdkit(dir.path(), &["report", "--out", "empty"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing artifacts"));
}

#[test]
fn full_default_suite_aggregates_deterministically() {
    let dir = tempdir().unwrap();
    let mut summaries = Vec::new();
    for run in ["a", "b"] {
        let out = ssdkit(dir.path(), &["verify", "--out", run, "--format", "csv"]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(dir.path().join(run).join("vz-mas.csv").is_file());
        let out = ssdkit(dir.path(), &["report", "--out", run]);
        assert_eq!(code(&out), 0);
        summaries.push((
            fs::read(dir.path().join(run).join("summary.json")).unwrap(),
            fs::read(dir.path().join(run).join("summary.csv")).unwrap(),
        ));
    }
    assert_eq!(summaries[0], summaries[1]);
    let summary: Value = serde_json::from_slice(&summaries[0].0).unwrap();
    assert!(summary["total"].as_u64().unwrap() >= 40);
    assert_eq!(summary["failed"], 0);
    assert_eq!(summary["reports"].as_array().unwrap().len(), 14);
    let csv = String::from_utf8(summaries[0].1.clone()).unwrap();
    assert!(csv.starts_with("suite,check,anchor,status,worst_residual\n"));
}

#[test]
fn projection_writes_a_rechecked_trace() {
    let dir = tempdir().unwrap();
    let out = ssdkit(dir.path(), &["project", "--point", "1,0", "--out", "o"]);
    assert_eq!(code(&out), 0);
    let trace = read_json(&dir.path().join("o/projection.json"));
    let limit: Vec<f64> = serde_json::from_value(trace["limit"].clone()).unwrap();
    assert!((limit[0] - 0.5).abs() < 1e-6 && (limit[1] - 0.5).abs() < 1e-6);
    assert!(trace["achieved_distance"].as_f64().unwrap() <= trace["distance_bound"].as_f64().unwrap());
}

#[test]
fn alignment_json_round_trips_omega() {
    let dir = tempdir().unwrap();
    let out = ssdkit(dir.path(), &["align", "--x", "1", "--xstar", "-1", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = read_json(&dir.path().join("o/alignment.json"));
    assert!((r["omega"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(r["report"]["suite"], "negative-alignment");
}

#[test]
fn conjugate_and_fitzpatrick_write_grid_csvs() {
    let dir = tempdir().unwrap();
    let out = ssdkit(dir.path(), &["conjugate", "--fn", "double-well", "--grid=-2:2:41", "--biconjugate", "--out", "c"]);
    assert_eq!(code(&out), 0);
    let bi = fs::read_to_string(dir.path().join("c/biconjugate.csv")).unwrap();
    assert!(bi.starts_with("grid,-2:2:41\nx1,value\n"));
    // the hull of the double well is zero between the wells
    let mid: Vec<f64> = bi.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(mid[10..=30].iter().all(|v| v.abs() < 1e-9));

    // a written function reads back through --fn
    let out = ssdkit(dir.path(), &["conjugate", "--fn", "c/biconjugate.csv", "--out", "d"]);
    assert_eq!(code(&out), 0);

    let out = ssdkit(dir.path(), &["fitzpatrick", "--set", "diagonal", "--grid=-2:2:21,-2:2:21", "--out", "f"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    for name in ["theta.csv", "phi.csv", "star_theta.csv", "fitzpatrick.json"] {
        assert!(dir.path().join("f").join(name).is_file(), "{name}");
    }
}
