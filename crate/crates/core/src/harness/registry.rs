//! Name-indexed access to every check, and the fixed suites.

use std::time::Instant;

use crate::analysis::CheckInstance;

use super::{criteria, lemmas, CheckResult, HarnessError, SuiteReport};

type CheckBody = fn() -> Result<Vec<CheckInstance>, HarnessError>;

/// Every named check. Criteria experiments first, module invariants after.
const CHECKS: &[(&str, CheckBody)] = &[
    ("mass-dissipation", criteria::mass_dissipation),
    (
        "equal-diffusion-max-principle",
        criteria::equal_diffusion_max_principle,
    ),
    ("regularity-scaling", criteria::regularity_scaling),
    ("spectral-gap-refinement", criteria::spectral_gap_refinement),
    ("averages-collapse", criteria::averages_collapse),
    ("averaged-residual-decay", criteria::averaged_residual_decay),
    (
        "complex-balance-convergence",
        criteria::complex_balance_convergence,
    ),
    ("boundary-repulsion", criteria::boundary_repulsion),
    ("small-data-global", criteria::small_data_global),
    ("truncation-consistency", criteria::truncation_consistency),
    ("exponent-tables", criteria::exponent_tables),
    ("growth-window-ceiling", criteria::growth_window_ceiling),
    ("ode-limit-agreement", criteria::ode_limit_agreement),
    ("shift-relaxation", criteria::shift_relaxation),
    ("quasi-uniform-margin", criteria::quasi_uniform_margin),
    ("laplacian-identities", lemmas::laplacian_identities),
    ("cosine-eigenmodes", lemmas::cosine_eigenmodes),
    ("heat-step-bounds", lemmas::heat_step_bounds),
    ("poincare-inequality", lemmas::poincare_inequality),
    ("quadrature-values", lemmas::quadrature_values),
    ("entropy-pointwise", lemmas::entropy_pointwise),
    ("monomial-conventions", lemmas::monomial_conventions),
    ("conservation-annihilation", lemmas::conservation_annihilation),
    (
        "complex-balance-orientation",
        lemmas::complex_balance_orientation,
    ),
    ("quasi-positivity-sampled", lemmas::quasi_positivity_sampled),
    ("cutoff-plateaus", lemmas::cutoff_plateaus),
    (
        "equilibrium-solver-agreement",
        lemmas::equilibrium_solver_agreement,
    ),
    ("rescale-map-identity", lemmas::rescale_map_identity),
    ("ode-fixed-point", lemmas::ode_fixed_point),
    ("young-domination", lemmas::young_domination),
    ("fit-recovery", lemmas::fit_recovery),
];

/// The thirteen headline experiments, in report order.
const ACCEPTANCE: &[&str] = &[
    "mass-dissipation",
    "equal-diffusion-max-principle",
    "regularity-scaling",
    "spectral-gap-refinement",
    "averages-collapse",
    "averaged-residual-decay",
    "complex-balance-convergence",
    "boundary-repulsion",
    "small-data-global",
    "truncation-consistency",
    "exponent-tables",
    "growth-window-ceiling",
    "ode-limit-agreement",
];

const SUITES: &[(&str, &[&str])] = &[
    (
        "quasi-uniform",
        &[
            "mass-dissipation",
            "equal-diffusion-max-principle",
            "exponent-tables",
            "quasi-uniform-margin",
        ],
    ),
    (
        "large-diffusion",
        &["growth-window-ceiling", "truncation-consistency"],
    ),
    ("small-data", &["small-data-global"]),
    (
        "averages-ode",
        &[
            "averages-collapse",
            "averaged-residual-decay",
            "ode-limit-agreement",
        ],
    ),
    ("complex-balance", &["complex-balance-convergence"]),
    ("boundary-equilibria", &["boundary-repulsion"]),
    ("close-to-equilibrium", &["shift-relaxation"]),
    (
        "lemmas",
        &[
            "regularity-scaling",
            "spectral-gap-refinement",
            "laplacian-identities",
            "cosine-eigenmodes",
            "heat-step-bounds",
            "poincare-inequality",
            "quadrature-values",
            "entropy-pointwise",
            "monomial-conventions",
            "conservation-annihilation",
            "complex-balance-orientation",
            "quasi-positivity-sampled",
            "cutoff-plateaus",
            "equilibrium-solver-agreement",
            "rescale-map-identity",
            "ode-fixed-point",
            "young-domination",
            "fit-recovery",
        ],
    ),
    ("acceptance", ACCEPTANCE),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

pub fn suite_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = SUITES.iter().map(|(name, _)| *name).collect();
    names.push("all");
    names
}

pub fn acceptance_check_names() -> &'static [&'static str] {
    ACCEPTANCE
}

/// The check names a suite runs, in order. The `all` suite is every
/// registered check once.
pub fn suite_checks(name: &str) -> Result<Vec<&'static str>, HarnessError> {
    if name == "all" {
        return Ok(check_names());
    }
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, checks)| checks.to_vec())
        .ok_or_else(|| HarnessError::UnknownSuite(name.to_string()))
}

pub fn run_check(name: &str) -> Result<CheckResult, HarnessError> {
    let (_, body) = CHECKS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| HarnessError::UnknownCheck(name.to_string()))?;
    let start = Instant::now();
    let instances = body()?;
    Ok(CheckResult::new(
        name,
        instances,
        start.elapsed().as_secs_f64(),
    ))
}

pub fn run_suite(name: &str) -> Result<SuiteReport, HarnessError> {
    let checks = suite_checks(name)?;
    let start = Instant::now();
    let mut results = Vec::with_capacity(checks.len());
    for check in checks {
        results.push(run_check(check)?);
    }
    let passed = results.iter().all(|r| r.passed);
    Ok(SuiteReport {
        name: name.to_string(),
        results,
        passed,
        seconds: start.elapsed().as_secs_f64(),
    })
}
