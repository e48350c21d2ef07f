//! Command-line front end for the reaction-diffusion lab.
//!
//! All numerics live in rdslab-core. This layer parses arguments, routes
//! to the harness, prints human-readable reports, and sets exit codes:
//! 0 success, 1 gates failed or run blew up, 2 usage, 3 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rdslab_core::harness::{
    artifacts, registry, run_check, run_suite, run_sweep, shipped_scenario_names, sweep_csv,
    sweep_json, HarnessError, Scenario,
};
use rdslab_core::harness::CheckResult;
use rdslab_core::network::{check_quasi_positivity, parse_network, DissipationClass};
use rdslab_core::solver::simulate;
use rdslab_core::{solve_complex_balanced_equilibrium, NonlinearitySpec};

#[derive(Parser)]
#[command(
    name = "rdslab",
    version,
    about = "Reaction-diffusion systems laboratory",
    long_about = "Simulates mass-action reaction networks with species-dependent \
                  diffusion on Neumann boxes and runs the quantitative checks that \
                  back the solver."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (shipped name or path to a TOML file) and write artifacts.
    Run {
        /// Shipped scenario name or path to a scenario TOML file.
        scenario: String,
        /// Output directory for diagnostics.csv, field snapshots, summary.json.
        #[arg(long, default_value = "rdslab-out")]
        out: PathBuf,
    },
    /// Run a named check suite and print one verdict line per check.
    Suite {
        /// Suite name; `rdslab list` shows the options.
        name: String,
        /// If given, write report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single named check and print every inequality it tested.
    Check {
        /// Check name; `rdslab list` shows the options.
        name: String,
        /// If given, write report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun a scenario with diffusion scaled by each factor and fit collapse rates.
    Sweep {
        /// Shipped scenario name or path to a scenario TOML file.
        scenario: String,
        /// Comma-separated diffusion multipliers, e.g. 1,2,4.
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<f64>,
        /// Fit window as two times, e.g. 0.1,0.4. Defaults to the middle of the run.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<f64>>,
        /// Output directory for sweep.csv and sweep.json.
        #[arg(long, default_value = "rdslab-out")]
        out: PathBuf,
    },
    /// Parse a reaction network file and print its structural report.
    CheckNetwork {
        /// Path to a network file (same syntax as inline scenario networks).
        path: PathBuf,
    },
    /// List shipped scenarios, checks, and suites.
    List,
}

fn main() -> ExitCode {
    // Die quietly when the read end of a pipe closes (rdslab ... | head).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::UnknownScenario(_)
                | HarnessError::UnknownSuite(_)
                | HarnessError::UnknownCheck(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn dispatch(command: Command) -> Result<bool, HarnessError> {
    match command {
        Command::Run { scenario, out } => cmd_run(&scenario, &out),
        Command::Suite { name, out } => cmd_suite(&name, out.as_deref()),
        Command::Check { name, out } => cmd_check(&name, out.as_deref()),
        Command::Sweep {
            scenario,
            factors,
            window,
            out,
        } => cmd_sweep(&scenario, &factors, window, &out),
        Command::CheckNetwork { path } => cmd_check_network(&path),
        Command::List => cmd_list(),
    }
}

fn cmd_run(arg: &str, out: &Path) -> Result<bool, HarnessError> {
    let scenario = Scenario::resolve(arg)?;
    let config = scenario.build()?;
    let species = config.nonlinearity.species();
    println!(
        "scenario {}: {} species, {} nodes, dt = {}, t_end = {}",
        scenario.name,
        species.len(),
        config.grid.node_count(),
        config.dt,
        config.t_end
    );
    let trajectory = simulate(&config)?;
    if trajectory.blew_up {
        println!(
            "  run blew up at t = {:.6}; artifacts cover the part before that",
            trajectory.blow_up_time.unwrap_or(trajectory.final_time)
        );
    } else {
        println!(
            "  reached t = {} with {} samples",
            trajectory.final_time,
            trajectory.records.len()
        );
        if let Some(last) = trajectory.records.last() {
            let avgs: Vec<String> = species
                .iter()
                .zip(&last.avg)
                .map(|(s, a)| format!("{s} = {a:.6}"))
                .collect();
            println!("  final averages: {}", avgs.join(", "));
        }
    }
    for path in artifacts::write_run_artifacts(out, &scenario, &config, &trajectory)? {
        println!("  wrote {}", path.display());
    }
    Ok(!trajectory.blew_up)
}

fn print_check_line(result: &CheckResult) {
    let verdict = if result.passed { "pass" } else { "FAIL" };
    println!(
        "  {:<36} {} ({:.2}s)",
        result.name, verdict, result.seconds
    );
    for inst in result.failures() {
        println!(
            "      failed {}: lhs = {:.6e}, rhs = {:.6e}",
            inst.label, inst.lhs, inst.rhs
        );
    }
}

fn cmd_suite(name: &str, out: Option<&Path>) -> Result<bool, HarnessError> {
    let report = run_suite(name)?;
    println!("suite {}: {} checks", report.name, report.results.len());
    for result in &report.results {
        print_check_line(result);
    }
    let passed = report.results.iter().filter(|r| r.passed).count();
    println!(
        "suite {}: {}/{} passed in {:.2}s",
        report.name,
        passed,
        report.results.len(),
        report.seconds
    );
    if let Some(dir) = out {
        let path = artifacts::write_suite_report(dir, &report)?;
        println!("wrote {}", path.display());
    }
    Ok(report.passed)
}

fn cmd_check(name: &str, out: Option<&Path>) -> Result<bool, HarnessError> {
    let result = run_check(name)?;
    let verdict = if result.passed { "pass" } else { "FAIL" };
    println!("check {}: {} ({:.2}s)", result.name, verdict, result.seconds);
    for inst in &result.instances {
        let mark = if inst.holds { "pass" } else { "FAIL" };
        println!(
            "  {mark} {}: lhs = {:.6e}, rhs = {:.6e}",
            inst.label, inst.lhs, inst.rhs
        );
    }
    let passed = result.passed;
    if let Some(dir) = out {
        let report = rdslab_core::harness::SuiteReport {
            name: result.name.clone(),
            passed: result.passed,
            seconds: result.seconds,
            results: vec![result],
        };
        let path = artifacts::write_suite_report(dir, &report)?;
        println!("wrote {}", path.display());
    }
    Ok(passed)
}

fn cmd_sweep(
    arg: &str,
    factors: &[f64],
    window: Option<Vec<f64>>,
    out: &Path,
) -> Result<bool, HarnessError> {
    let scenario = Scenario::resolve(arg)?;
    let window = match window {
        Some(w) if w.len() == 2 => Some((w[0], w[1])),
        Some(w) => {
            return Err(HarnessError::Invalid(format!(
                "--window needs exactly two times, got {}",
                w.len()
            )))
        }
        None => None,
    };
    let report = run_sweep(&scenario, factors, window)?;
    println!(
        "sweep {} over {} factors, fit window [{}, {}]",
        report.scenario,
        report.rows.len(),
        report.window.0,
        report.window.1
    );
    for row in &report.rows {
        if row.blew_up {
            println!("  factor {}: blew up", row.factor);
        } else {
            match (row.rate, row.r_squared) {
                (Some(rate), Some(r2)) => {
                    println!("  factor {}: rate = {rate:.6}, r_squared = {r2:.6}", row.factor)
                }
                _ => println!("  factor {}: no usable fit", row.factor),
            }
        }
    }
    println!(
        "rates nondecreasing with factor: {}",
        if report.rates_nondecreasing { "yes" } else { "no" }
    );
    write_text_cli(&out.join("sweep.csv"), &sweep_csv(&report))?;
    println!("  wrote {}", out.join("sweep.csv").display());
    write_text_cli(&out.join("sweep.json"), &format!("{:#}\n", sweep_json(&report)))?;
    println!("  wrote {}", out.join("sweep.json").display());
    Ok(true)
}

fn cmd_check_network(path: &Path) -> Result<bool, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let net = parse_network(&text)?;
    println!(
        "network {}: {} species, {} reactions",
        path.display(),
        net.species().len(),
        net.reactions().len()
    );
    println!("  species: {}", net.species().join(", "));
    let class = match net.dissipation_class() {
        DissipationClass::Conservative => "conservative (every reaction preserves total mass)",
        DissipationClass::Dissipative => "dissipative (no reaction creates net mass)",
        DissipationClass::Indefinite => "indefinite (some reaction creates net mass)",
    };
    println!("  dissipation class: {class}");
    println!("  growth exponent: {}", net.growth_exponent());
    let laws = net.conservation_laws();
    println!("  conservation laws: {}", laws.len());
    for law in &laws {
        let terms: Vec<String> = law
            .iter()
            .zip(net.species())
            .filter(|(&c, _)| c.abs() > 1e-12)
            .map(|(&c, s)| format!("{c:.6} {s}"))
            .collect();
        println!("    {}", terms.join(" + "));
    }
    let spec = NonlinearitySpec::MassAction(net.clone());
    let qp = check_quasi_positivity(&spec, 200, 1);
    println!(
        "  quasi-positivity on {} boundary samples: {}",
        qp.samples,
        if qp.passed { "holds" } else { "VIOLATED" }
    );
    let ones = vec![1.0; net.species().len()];
    match solve_complex_balanced_equilibrium(&net, &ones) {
        Ok(eq) => {
            let coords: Vec<String> = eq.u_inf.iter().map(|x| format!("{x:.6}")).collect();
            let report = net.check_complex_balance(&eq.u_inf)?;
            println!(
                "  complex-balanced equilibrium from the unit state: ({}){}",
                coords.join(", "),
                if report.balanced {
                    ""
                } else {
                    " [balance residual above tolerance]"
                }
            );
        }
        Err(e) => {
            println!("  no complex-balanced equilibrium from the unit state ({e})");
        }
    }
    Ok(true)
}

fn cmd_list() -> Result<bool, HarnessError> {
    println!("shipped scenarios:");
    for name in shipped_scenario_names() {
        let scenario = Scenario::resolve(name)?;
        println!("  {:<26} {}", name, scenario.description);
    }
    println!("\nchecks:");
    for name in registry::check_names() {
        println!("  {name}");
    }
    println!("\nsuites:");
    for name in registry::suite_names() {
        let members = registry::suite_checks(name)?;
        println!("  {:<20} {} checks", name, members.len());
    }
    Ok(true)
}

fn write_text_cli(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| HarnessError::Io {
                path: parent.display().to_string(),
                message: e.to_string(),
            })?;
        }
    }
    fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
