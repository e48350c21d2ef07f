//! Deterministic artifact writers.
//!
//! Every writer builds the full text in memory with plain `{}` float
//! formatting, so two runs of the same scenario produce byte-identical
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::grid::{FieldState, SpatialGrid};
use crate::solver::{SimConfig, Trajectory};

use super::scenario::Scenario;
use super::{CheckResult, HarnessError, SuiteReport};

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::Io {
            path: parent.display().to_string(),
            message: e.to_string(),
        })?;
    }
    fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// One row per sample: time, per-species norms and averages, then the
/// aggregate columns. Optional columns appear only when every sample
/// carries them.
pub fn diagnostics_csv(trajectory: &Trajectory, species: &[String]) -> String {
    let with_entropy = trajectory
        .records
        .first()
        .is_some_and(|r| r.entropy.is_some());
    let with_lyapunov = trajectory
        .records
        .first()
        .is_some_and(|r| r.lyapunov.is_some());

    let mut out = String::new();
    out.push('t');
    for name in species {
        for column in ["l1", "l2", "linf", "avg", "dev_l2", "dev_linf"] {
            let _ = write!(out, ",{column}_{name}");
        }
    }
    out.push_str(",sum_linf,total_mass");
    if with_entropy {
        out.push_str(",entropy");
    }
    if with_lyapunov {
        out.push_str(",lyapunov");
    }
    out.push('\n');

    for record in &trajectory.records {
        let _ = write!(out, "{}", record.t);
        for i in 0..species.len() {
            let _ = write!(
                out,
                ",{},{},{},{},{},{}",
                record.l1[i],
                record.l2[i],
                record.linf[i],
                record.avg[i],
                record.dev_l2[i],
                record.dev_linf[i]
            );
        }
        let _ = write!(out, ",{},{}", record.sum_linf, record.total_mass);
        if with_entropy {
            let _ = write!(out, ",{}", record.entropy.unwrap_or(f64::NAN));
        }
        if with_lyapunov {
            let _ = write!(out, ",{}", record.lyapunov.unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

/// Full snapshot of all species at one time, one row per node, with the
/// grid shape in comment lines so the file stands alone.
pub fn fields_csv(
    scenario: &str,
    grid: &SpatialGrid,
    state: &FieldState,
    species: &[String],
    t: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# scenario = {scenario}");
    let _ = writeln!(out, "# t = {t}");
    let lengths: Vec<String> = grid.lengths().iter().map(|l| l.to_string()).collect();
    let counts: Vec<String> = grid.counts().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "# lengths = {}", lengths.join(" "));
    let _ = writeln!(out, "# counts = {}", counts.join(" "));

    out.push('x');
    if grid.dim() == 2 {
        out.push_str(",y");
    }
    for name in species {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');

    for node in 0..grid.node_count() {
        let position = grid.node_position(node);
        let _ = write!(out, "{}", position[0]);
        for coordinate in &position[1..] {
            let _ = write!(out, ",{coordinate}");
        }
        for field in &state.fields {
            let _ = write!(out, ",{}", field[node]);
        }
        out.push('\n');
    }
    out
}

/// Compact JSON digest of a finished run.
pub fn run_summary(name: &str, species: &[String], trajectory: &Trajectory) -> serde_json::Value {
    let last = trajectory.records.last();
    json!({
        "name": name,
        "species": species,
        "samples": trajectory.records.len(),
        "final_time": trajectory.final_time,
        "blew_up": trajectory.blew_up,
        "blow_up_time": trajectory.blow_up_time,
        "final_avg": last.map(|r| r.avg.clone()),
        "final_linf": last.map(|r| r.linf.clone()),
        "initial_total_mass": trajectory.records.first().map(|r| r.total_mass),
        "final_total_mass": last.map(|r| r.total_mass),
        "final_entropy": last.and_then(|r| r.entropy),
        "final_lyapunov": last.and_then(|r| r.lyapunov),
    })
}

pub fn check_json(result: &CheckResult) -> serde_json::Value {
    json!({
        "name": result.name,
        "passed": result.passed,
        "instances": result.instances.iter().map(|i| json!({
            "label": i.label,
            "lhs": i.lhs,
            "rhs": i.rhs,
            "pass": i.holds,
        })).collect::<Vec<_>>(),
    })
}

pub fn suite_json(report: &SuiteReport) -> serde_json::Value {
    json!({
        "name": report.name,
        "passed": report.passed,
        "checks": report.results.iter().map(check_json).collect::<Vec<_>>(),
    })
}

/// Write diagnostics, field snapshots, and the summary for one run.
/// Returns the paths written, in write order.
pub fn write_run_artifacts(
    dir: &Path,
    scenario: &Scenario,
    config: &SimConfig,
    trajectory: &Trajectory,
) -> Result<Vec<PathBuf>, HarnessError> {
    let species = config.nonlinearity.species();
    let mut written = Vec::new();

    let diagnostics = dir.join("diagnostics.csv");
    write_text(&diagnostics, &diagnostics_csv(trajectory, &species))?;
    written.push(diagnostics);

    let stride = scenario.output.fields_stride;
    if stride > 0 {
        if let Some(states) = &trajectory.states {
            for (k, state) in states.iter().enumerate().step_by(stride) {
                let path = dir.join(format!("fields_{k:05}.csv"));
                let text = fields_csv(
                    &scenario.name,
                    &config.grid,
                    state,
                    &species,
                    trajectory.times[k],
                );
                write_text(&path, &text)?;
                written.push(path);
            }
        }
    }

    let final_path = dir.join("fields_final.csv");
    let text = fields_csv(
        &scenario.name,
        &config.grid,
        &trajectory.final_state,
        &species,
        trajectory.final_time,
    );
    write_text(&final_path, &text)?;
    written.push(final_path);

    let summary_path = dir.join("summary.json");
    let summary = run_summary(&scenario.name, &species, trajectory);
    write_text(&summary_path, &format!("{:#}\n", summary))?;
    written.push(summary_path);

    Ok(written)
}

/// Write a suite (or single-check) report as `report.json`.
pub fn write_suite_report(dir: &Path, report: &SuiteReport) -> Result<PathBuf, HarnessError> {
    let path = dir.join("report.json");
    write_text(&path, &format!("{:#}\n", suite_json(report)))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::CheckInstance;
    use crate::solver::simulate;

    fn smoke_run() -> (Scenario, SimConfig, Trajectory) {
        let scenario = Scenario::resolve("mass-dissipation-smoke").unwrap();
        let mut config = scenario.build().unwrap();
        config.t_end = 0.05;
        config.sample_stride = 10;
        config.store_fields = true;
        let trajectory = simulate(&config).unwrap();
        (scenario, config, trajectory)
    }

    #[test]
    fn diagnostics_header_matches_species() {
        let (_, config, trajectory) = smoke_run();
        let text = diagnostics_csv(&trajectory, &config.nonlinearity.species());
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("t,l1_A,l2_A,linf_A,avg_A,dev_l2_A,dev_linf_A,l1_B"));
        assert!(header.ends_with("sum_linf,total_mass"));
        // one data line per sample, all with the same column count
        let columns = header.split(',').count();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), trajectory.records.len() + 1);
        assert!(lines.iter().all(|l| l.split(',').count() == columns));
    }

    #[test]
    fn diagnostics_are_byte_deterministic() {
        let (_, config, t1) = smoke_run();
        let (_, _, t2) = smoke_run();
        let species = config.nonlinearity.species();
        assert_eq!(diagnostics_csv(&t1, &species), diagnostics_csv(&t2, &species));
    }

    #[test]
    fn fields_csv_has_one_row_per_node() {
        let (scenario, config, trajectory) = smoke_run();
        let text = fields_csv(
            &scenario.name,
            &config.grid,
            &trajectory.final_state,
            &config.nonlinearity.species(),
            trajectory.final_time,
        );
        let data_lines = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(data_lines, config.grid.node_count() + 1);
        assert!(text.contains("# counts = 32"));
        assert!(text.lines().any(|l| l == "x,A,B,C"));
    }

    #[test]
    fn run_artifacts_land_in_the_out_dir() {
        let (scenario, config, trajectory) = smoke_run();
        let dir = std::env::temp_dir().join(format!("rdslab-artifacts-{}", std::process::id()));
        let written = write_run_artifacts(&dir, &scenario, &config, &trajectory).unwrap();
        assert!(written.iter().all(|p| p.is_file()));
        assert_eq!(written.last().unwrap().file_name().unwrap(), "summary.json");
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(written.last().unwrap()).unwrap()).unwrap();
        assert_eq!(summary["name"], "mass-dissipation-smoke");
        assert_eq!(summary["blew_up"], false);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn suite_json_round_trips_instances() {
        let result = CheckResult::new(
            "demo-check",
            vec![
                CheckInstance::bounded("a <= b", 1.0, 2.0),
                CheckInstance::bounded("c <= d", 3.0, 2.5),
            ],
            0.1,
        );
        let report = SuiteReport {
            name: "demo".to_string(),
            passed: result.passed,
            results: vec![result],
            seconds: 0.1,
        };
        let value = suite_json(&report);
        assert_eq!(value["passed"], false);
        assert_eq!(value["checks"][0]["instances"][1]["pass"], false);
        assert_eq!(value["checks"][0]["instances"][0]["lhs"], 1.0);
    }
}
