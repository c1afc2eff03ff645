//! End-to-end checks of the binary: exit-code contract, file outputs,
//! determinism, and schema round-trips.

use std::path::Path;
use std::process::{Command, Output};

use zubov_core::net::load_weights;

fn zubov(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zubov"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) {
    std::fs::write(dir.join("cfg.json"), body).unwrap();
}

const TINY_CONFIG: &str = r#"{
  "system": { "kind": "double-integrator" },
  "train": { "iterations": 60, "w_dims": [2, 8, 1], "pi_dims": [2, 6, 1] },
  "verify": { "budget": 200000, "tol": 0.05 },
  "paths": { "weights_out": "run", "report_out": "run/report.json", "data_out": "run" },
  "seed": 4
}"#;

#[test]
fn train_writes_outputs_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), TINY_CONFIG);
    let out = zubov(tmp.path(), &["train", "--config", "cfg.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final losses"));

    for file in ["run/w_theta.json", "run/pi_gamma.json", "run/history.csv"] {
        assert!(tmp.path().join(file).exists(), "{file} missing");
    }
    // weight files parse back under the schema
    let (w, actuation) = load_weights(&tmp.path().join("run/w_theta.json")).unwrap();
    assert_eq!(w.layer_dims, vec![2, 8, 1]);
    assert!(actuation.is_none());
    let (_, actuation) = load_weights(&tmp.path().join("run/pi_gamma.json")).unwrap();
    assert!(actuation.is_some());

    let history = std::fs::read(tmp.path().join("run/history.csv")).unwrap();
    assert_eq!(
        std::str::from_utf8(&history).unwrap().lines().next().unwrap(),
        "iteration,l_z,l_r,l_p,l_actor,l_b,total"
    );

    // identical seed: byte-identical history and weights
    let tmp2 = tempfile::tempdir().unwrap();
    write_config(tmp2.path(), TINY_CONFIG);
    let out = zubov(tmp2.path(), &["train", "--config", "cfg.json"]);
    assert!(out.status.success());
    assert_eq!(history, std::fs::read(tmp2.path().join("run/history.csv")).unwrap());
    assert_eq!(
        std::fs::read(tmp.path().join("run/w_theta.json")).unwrap(),
        std::fs::read(tmp2.path().join("run/w_theta.json")).unwrap()
    );
}

#[test]
fn unknown_config_key_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(
        tmp.path(),
        r#"{ "system": { "kind": "double-integrator" }, "unknown_field": 1 }"#,
    );
    let out = zubov(tmp.path(), &["train", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_field"));
}

#[test]
fn missing_system_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = zubov(tmp.path(), &["lqr"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_field_value_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(
        tmp.path(),
        r#"{ "system": { "kind": "double-integrator" }, "train": { "alpha": -1.0 } }"#,
    );
    let out = zubov(tmp.path(), &["train", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

/// Hand-built weights violating condition 1: W(x) = tanh(tanh(x1)) is
/// negative for x1 < 0 while W(0) = 0.
fn write_broken_certificate(dir: &Path) {
    std::fs::create_dir_all(dir.join("run")).unwrap();
    std::fs::write(
        dir.join("run/w_theta.json"),
        r#"{
  "layer_dims": [2, 1, 1],
  "weights": [[1.0, 0.0], [1.0]],
  "biases": [[0.0], [0.0]],
  "output_activation": "Tanh",
  "actuation": null
}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("run/pi_gamma.json"),
        r#"{
  "layer_dims": [2, 1],
  "weights": [[0.0, 0.0]],
  "biases": [[0.0]],
  "output_activation": "Identity",
  "actuation": { "kind": "box-squash", "lower": [-1.0], "upper": [1.0] }
}"#,
    )
    .unwrap();
}

#[test]
fn verify_broken_certificate_exits_4_with_counterexample() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), TINY_CONFIG);
    write_broken_certificate(tmp.path());
    let out = zubov(tmp.path(), &["verify", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["status"], "Falsified");
    assert!(report["counterexample"]["x"].is_array());
    assert!(report["counterexample"]["margin"].as_f64().unwrap() >= 0.0);
}

#[test]
fn verify_with_unit_budget_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(
        tmp.path(),
        r#"{
  "system": { "kind": "double-integrator" },
  "verify": { "c": 0.5, "budget": 1 },
  "paths": { "weights_out": "run", "report_out": "run/report.json", "data_out": "run" }
}"#,
    );
    // W ≈ 0.96 everywhere: the first face box discharges, then the budget
    // is spent with work remaining
    std::fs::create_dir_all(tmp.path().join("run")).unwrap();
    std::fs::write(
        tmp.path().join("run/w_theta.json"),
        r#"{
  "layer_dims": [2, 1],
  "weights": [[0.0, 0.0]],
  "biases": [[2.0]],
  "output_activation": "Tanh",
  "actuation": null
}"#,
    )
    .unwrap();
    std::fs::write(
        tmp.path().join("run/pi_gamma.json"),
        r#"{
  "layer_dims": [2, 1],
  "weights": [[0.0, 0.0]],
  "biases": [[0.0]],
  "output_activation": "Identity",
  "actuation": { "kind": "box-squash", "lower": [-1.0], "upper": [1.0] }
}"#,
    )
    .unwrap();
    let out = zubov(tmp.path(), &["verify", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["status"], "Unknown");
}

#[test]
fn lqr_report_schema_and_area_identity() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), TINY_CONFIG);
    let out = zubov(tmp.path(), &["lqr", "--config", "cfg.json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/lqr_report.json")).unwrap(),
    )
    .unwrap();
    let p = &report["p"];
    let det = p[0][0].as_f64().unwrap() * p[1][1].as_f64().unwrap()
        - p[0][1].as_f64().unwrap() * p[1][0].as_f64().unwrap();
    let c = report["c_lqr"].as_f64().unwrap();
    let area = report["ellipse_area"].as_f64().unwrap();
    assert!(c > 0.0);
    assert!((area - std::f64::consts::PI * c / det.sqrt()).abs() < 1e-12);
    assert!(report["residual"].as_f64().unwrap() < 1e-9);
    assert!(report["k"].is_array());
}

#[test]
fn plot_data_emits_parseable_grids_and_on_level_polylines() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), TINY_CONFIG);
    write_broken_certificate(tmp.path()); // any valid weights work for plotting
    let out = zubov(
        tmp.path(),
        &["plot-data", "--config", "cfg.json", "--c", "0.3", "--grid-n", "41"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let grid = std::fs::read_to_string(tmp.path().join("run/w_grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,W");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 41 * 41);
    for row in &rows {
        let w: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(w > -1.0 && w < 1.0);
    }

    let (w_net, _) = load_weights(&tmp.path().join("run/w_theta.json")).unwrap();
    let level = std::fs::read_to_string(tmp.path().join("run/level_0.3.csv")).unwrap();
    let mut lines = level.lines();
    assert_eq!(lines.next().unwrap(), "segment,x1,x2");
    let mut n_points = 0;
    for row in lines {
        let cols: Vec<f64> = row
            .split(',')
            .skip(1)
            .map(|t| t.parse().unwrap())
            .collect();
        let w = w_net.forward(&cols).unwrap()[0];
        assert!((w - 0.3).abs() < 1e-3, "off-level point {cols:?}: W = {w}");
        n_points += 1;
    }
    assert!(n_points > 0);

    let field = std::fs::read_to_string(tmp.path().join("run/vector_field.csv")).unwrap();
    assert!(field.starts_with("x1,x2,f1,f2\n"));
    for i in 0..8 {
        assert!(tmp.path().join(format!("run/trajectory_{i}.csv")).exists());
    }
}

#[test]
fn export_smt_writes_three_condition_files() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), TINY_CONFIG);
    write_broken_certificate(tmp.path());
    let out = zubov(tmp.path(), &["export-smt", "--config", "cfg.json", "--c", "0.5"]);
    assert!(out.status.success());
    for (name, marker) in [
        ("condition1.smt2", "(<= w_a2_0"),
        ("condition2.smt2", "(assert (>= lie 0.0))"),
        ("condition3.smt2", "(or (= x1"),
    ] {
        let text = std::fs::read_to_string(tmp.path().join("run").join(name)).unwrap();
        assert!(text.contains("(set-logic QF_NRA)"));
        assert!(text.contains("(check-sat)"));
        assert!(text.contains(marker), "{name} missing {marker}");
        assert_eq!(text.matches("(declare-fun x").count(), 2);
    }
}

#[test]
fn simulate_writes_trajectory_csv() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), TINY_CONFIG);
    write_broken_certificate(tmp.path());
    let out = zubov(
        tmp.path(),
        &["simulate", "--config", "cfg.json", "--x0", "0.4,-0.2", "--out", "run/t.csv"],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("run/t.csv")).unwrap();
    assert!(text.starts_with("t,x1,x2\n"));
    let second = text.lines().nth(1).unwrap();
    assert_eq!(second, "0,0.4,-0.2");
    // bad x0 dimension is a usage error
    let out = zubov(tmp.path(), &["simulate", "--config", "cfg.json", "--x0", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
}
