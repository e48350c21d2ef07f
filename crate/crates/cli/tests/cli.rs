//! End-to-end tests against the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rdslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rdslab-cli-{name}"));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    dir
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let out = scratch("run");
    let result = rdslab(&[
        "run",
        "mass-dissipation-smoke",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stdout(&result));
    for name in ["diagnostics.csv", "fields_final.csv", "summary.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["name"], "mass-dissipation-smoke");
    assert_eq!(summary["blew_up"], false);
}

#[test]
fn runs_are_byte_identical() {
    let out_a = scratch("det-a");
    let out_b = scratch("det-b");
    for out in [&out_a, &out_b] {
        let result = rdslab(&["run", "averages-collapse", "--out", out.to_str().unwrap()]);
        assert!(result.status.success());
    }
    let a = std::fs::read(out_a.join("diagnostics.csv")).unwrap();
    let b = std::fs::read(out_b.join("diagnostics.csv")).unwrap();
    assert_eq!(a, b, "diagnostics differ between identical runs");
}

#[test]
fn scenario_file_path_is_accepted() {
    let out = scratch("file-path");
    let path = repo_file("scenarios/two-dim-relaxation.toml");
    let result = rdslab(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", stdout(&result));
    assert!(out.join("fields_final.csv").is_file());
}

#[test]
fn suite_prints_per_check_lines_and_writes_report() {
    let out = scratch("suite");
    let result = rdslab(&["suite", "small-data", "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert!(text.contains("small-data-global"));
    assert!(text.contains("1/1 passed"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn unknown_names_exit_with_usage_code() {
    assert_eq!(rdslab(&["suite", "bogus"]).status.code(), Some(2));
    assert_eq!(rdslab(&["check", "bogus"]).status.code(), Some(2));
    assert_eq!(rdslab(&["run", "bogus"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_json() {
    let out = scratch("sweep");
    let result = rdslab(&[
        "sweep",
        "averages-collapse",
        "--factors",
        "1,2",
        "--window",
        "0.02,0.3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stdout(&result));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("factor,rate,r_squared,blew_up"));
    assert_eq!(csv.lines().count(), 3);
    assert!(stdout(&result).contains("rates nondecreasing with factor: yes"));
}

#[test]
fn malformed_window_is_a_runtime_error() {
    let result = rdslab(&["sweep", "averages-collapse", "--factors", "1", "--window", "0.1"]);
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn check_network_reports_structure() {
    let path = repo_file("scenarios/cycle.crn");
    let result = rdslab(&["check-network", path.to_str().unwrap()]);
    assert!(result.status.success());
    let text = stdout(&result);
    assert!(text.contains("3 species, 3 reactions"));
    assert!(text.contains("conservative"));
    assert!(text.contains("quasi-positivity on 200 boundary samples: holds"));
    assert!(text.contains("(1.000000, 1.000000, 1.000000)"));
}

#[test]
fn list_names_every_shipped_scenario_and_suite() {
    let result = rdslab(&["list"]);
    assert!(result.status.success());
    let text = stdout(&result);
    for name in [
        "mass-dissipation-smoke",
        "averages-collapse",
        "complex-balance-cycle",
        "small-data-builtin",
        "close-to-equilibrium",
        "two-dim-relaxation",
    ] {
        assert!(text.contains(name), "missing scenario {name}");
    }
    assert!(text.contains("acceptance"));
    assert!(text.contains("lemmas"));
}
