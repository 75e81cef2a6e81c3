//! End-to-end checks of the command-line binary: exit codes, output files,
//! and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ctqw-search")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn binary")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn analyze_report(dir: &Path) -> serde_json::Value {
    let text = fs::read_to_string(dir.join("analyze.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn analyze_complete_graph_reports_near_unit_amplitude() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"graph":{"family":"complete","n":1024}}"#);
    let out = run(&[
        "analyze",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = analyze_report(tmp.path());
    let nu = report["prediction"]["nu_pred"].as_f64().unwrap();
    assert!((nu - 0.9995).abs() < 1e-3, "nu_pred = {nu}");
    assert_eq!(report["prediction"]["regime"], "standard");
    assert_eq!(report["optimality"], "optimal");
    assert!(tmp.path().join("curve.csv").exists());
    let curve = fs::read_to_string(tmp.path().join("curve.csv")).unwrap();
    assert!(curve.starts_with("t,re,im,abs\n"));
}

#[test]
fn analyze_lattice_is_out_of_validity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"graph":{"family":"lattice","sides":[32,32],"periodic":true},"curve_points":0}"#,
    );
    let out = run(&[
        "analyze",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = analyze_report(tmp.path());
    assert_eq!(report["prediction"]["regime"], "out_of_validity");
    assert_eq!(report["optimality"], "out_of_validity");
    assert_eq!(report["hitting_time"]["in_bracket"], true);
    assert!(!tmp.path().join("curve.csv").exists());
}

#[test]
fn analyze_thin_rook_detects_quasi_degeneracy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"graph":{"family":"rook","n1":2,"n2":512}}"#);
    let out = run(&[
        "analyze",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = analyze_report(tmp.path());
    assert_eq!(report["prediction"]["regime"], "quasi_degenerate");
    assert_eq!(report["d"], 2);
}

#[test]
fn analyze_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"graph":{"family":"complete","n":512}}"#);
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    for dir in [&out1, &out2] {
        let out = run(&["analyze", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(out1.join("analyze.json")).unwrap(),
        fs::read(out2.join("analyze.json")).unwrap()
    );
    assert_eq!(
        fs::read(out1.join("curve.csv")).unwrap(),
        fs::read(out2.join("curve.csv")).unwrap()
    );
}

#[test]
fn sweep_r_writes_expected_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"graph":{"family":"complete","n":1024},
            "r_grid":{"min_factor":0.5,"max_factor":2.0,"points":7}}"#,
    );
    let out = run(&[
        "sweep-r",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("sweep_r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "r,in_window,sup_amp,peak_time,bound");
    assert_eq!(lines.count(), 7);
}

#[test]
fn rook_table_writes_rows_and_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"graph":{"family":"rook","n1":4,"n2":16},
            "rook_table":{"sigmas":[0.4],"log2_sizes":[10,11,12,13],
                          "include_column_subspace":true}}"#,
    );
    let out = run(&[
        "rook-table",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("rook_table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let fits: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("rook_table_fits.json")).unwrap())
            .unwrap();
    assert_eq!(fits.as_array().unwrap().len(), 2);
    assert_eq!(fits[0]["expected_time_slope"].as_f64().unwrap(), 0.5);
    assert!(fits[1]["column_subspace"].as_bool().unwrap());
}

#[test]
fn config_errors_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().to_str().unwrap().to_owned();

    let out = run(&[
        "analyze",
        "--config",
        "/nonexistent.json",
        "--out",
        &out_dir,
    ]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_config(
        tmp.path(),
        r#"{"graph":{"family":"complete","n":64},"typo":1}"#,
    );
    let out = run(&["analyze", "--config", &cfg, "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(2));

    // sweep without a grid
    let cfg = write_config(tmp.path(), r#"{"graph":{"family":"complete","n":64}}"#);
    let out = run(&["sweep-r", "--config", &cfg, "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(2));

    // exponent fit needs several sizes
    let cfg = write_config(
        tmp.path(),
        r#"{"graph":{"family":"rook","n1":4,"n2":16},
            "rook_table":{"sigmas":[0.4],"log2_sizes":[10]}}"#,
    );
    let out = run(&["rook-table", "--config", &cfg, "--out", &out_dir]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    // dense-only family above the dense cap
    let cfg = write_config(
        tmp.path(),
        r#"{"graph":{"family":"erdos_renyi","n":5000,"p":0.5,"seed":1}}"#,
    );
    let out = run(&[
        "analyze",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn threads_flag_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"graph":{"family":"complete","n":256}}"#);
    let out = run(&[
        "analyze",
        "--config",
        &cfg,
        "--out",
        tmp.path().to_str().unwrap(),
        "--threads",
        "2",
        "--seed",
        "7",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
