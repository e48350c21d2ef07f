//! Scenario configs, named checks, suites, sweeps, and artifact writers.
//!
//! A scenario is a TOML file describing one run (grid, network, dynamics,
//! initial data); a check is a named, self-contained verification that
//! produces inequality instances with raw numbers; a suite is a fixed list
//! of checks. Everything routes through [`registry::run_check`] /
//! [`registry::run_suite`] so the command-line layer stays thin.

pub mod artifacts;
pub mod criteria;
pub mod lemmas;
pub mod registry;
pub mod scenario;
pub mod sweep;

use std::fmt;

use crate::analysis::{AnalysisError, CheckInstance};
use crate::equilibria::EquilibriumError;
use crate::grid::GridError;
use crate::network::{NetworkError, ParseError};
use crate::solver::SolverError;

pub use registry::{acceptance_check_names, run_check, run_suite, suite_checks, suite_names};
pub use scenario::{shipped_scenario, shipped_scenario_names, Scenario};
pub use sweep::{run_sweep, sweep_csv, sweep_json, SweepReport, SweepRow};

#[derive(Debug)]
pub enum HarnessError {
    Io { path: String, message: String },
    Toml { message: String },
    UnknownScenario(String),
    UnknownSuite(String),
    UnknownCheck(String),
    Invalid(String),
    Parse(ParseError),
    Network(NetworkError),
    Solver(SolverError),
    Grid(GridError),
    Equilibrium(EquilibriumError),
    Analysis(AnalysisError),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Io { path, message } => write!(f, "{path}: {message}"),
            HarnessError::Toml { message } => write!(f, "scenario file: {message}"),
            HarnessError::UnknownScenario(name) => {
                write!(f, "no scenario file or shipped scenario named '{name}'")
            }
            HarnessError::UnknownSuite(name) => write!(f, "unknown suite '{name}'"),
            HarnessError::UnknownCheck(name) => write!(f, "unknown check '{name}'"),
            HarnessError::Invalid(msg) => write!(f, "invalid scenario: {msg}"),
            HarnessError::Parse(e) => write!(f, "{e}"),
            HarnessError::Network(e) => write!(f, "{e}"),
            HarnessError::Solver(e) => write!(f, "{e}"),
            HarnessError::Grid(e) => write!(f, "{e}"),
            HarnessError::Equilibrium(e) => write!(f, "{e}"),
            HarnessError::Analysis(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<ParseError> for HarnessError {
    fn from(e: ParseError) -> Self {
        HarnessError::Parse(e)
    }
}

impl From<NetworkError> for HarnessError {
    fn from(e: NetworkError) -> Self {
        HarnessError::Network(e)
    }
}

impl From<SolverError> for HarnessError {
    fn from(e: SolverError) -> Self {
        HarnessError::Solver(e)
    }
}

impl From<GridError> for HarnessError {
    fn from(e: GridError) -> Self {
        HarnessError::Grid(e)
    }
}

impl From<EquilibriumError> for HarnessError {
    fn from(e: EquilibriumError) -> Self {
        HarnessError::Equilibrium(e)
    }
}

impl From<AnalysisError> for HarnessError {
    fn from(e: AnalysisError) -> Self {
        HarnessError::Analysis(e)
    }
}

/// Outcome of one named check: the check passes exactly when every
/// inequality instance holds.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub instances: Vec<CheckInstance>,
    pub seconds: f64,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, instances: Vec<CheckInstance>, seconds: f64) -> Self {
        let passed = instances.iter().all(|i| i.holds);
        CheckResult {
            name: name.into(),
            passed,
            instances,
            seconds,
        }
    }

    /// Instances that did not hold, for terse failure summaries.
    pub fn failures(&self) -> impl Iterator<Item = &CheckInstance> {
        self.instances.iter().filter(|i| !i.holds)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub results: Vec<CheckResult>,
    pub passed: bool,
    pub seconds: f64,
}
