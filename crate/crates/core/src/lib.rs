//! Reaction-diffusion systems laboratory.
//!
//! Simulates mass-dissipating reaction networks with species-dependent
//! diffusion on boxes with homogeneous Neumann boundaries, and checks the
//! quantitative machinery those systems obey: uniform-in-time bounds,
//! bootstrap exponent schedules, 1/d scaling of parabolic regularity
//! constants, exponential collapse to spatial averages, and convergence to
//! complex-balanced equilibria.
//!
//! Module map:
//! - [`network`]: reaction DSL, mass-action right-hand sides, structural
//!   checks (quasi-positivity, dissipation class, conservation laws,
//!   complex balance).
//! - [`equilibria`]: relative entropies and equilibrium solvers (entropy
//!   minimization over a compatibility class, single reversible pairs,
//!   boundary equilibria).
//! - [`grid`]: cell-centered Neumann grids, discrete Laplacian, norms,
//!   implicit heat solves, empirical maximal-regularity constants.
//! - [`solver`]: IMEX time stepping with positivity step rejection, time
//!   rescaling, smooth cutoffs, ODE comparison runs, averaged residuals.
//! - [`analysis`]: exponent schedules, closed-form bounds, exponential
//!   decay fits, uniform-bound reports.
//! - [`harness`]: scenario configs, named checks, suites, CSV/JSON artifacts.

pub mod analysis;
pub mod equilibria;
pub mod grid;
pub mod harness;
pub mod network;
pub mod solver;

pub use analysis::{
    b_m_bound, bootstrap_schedule, fit_exponential, gronwall_ceiling, large_diffusion_k,
    poincare_gap, quasi_uniform_condition, uniform_bound_report, young_bound, BootstrapSchedule,
    CheckInstance, ConditionReport, DecayFit, UniformBoundReport,
};
pub use equilibria::{
    find_boundary_equilibria_single, relative_entropy_field, relative_entropy_vector,
    solve_complex_balanced_equilibrium, solve_single_reversible_equilibrium, EquilibriumKind,
    EquilibriumSolution,
};
pub use grid::{FieldState, RegularityEstimate, SpatialGrid};
pub use network::{
    builtin_nonlinearity, parse_network, BuiltinNonlinearity, DissipationClass, NonlinearitySpec,
    Reaction, ReactionNetwork,
};
pub use solver::{
    averaged_residual, lipschitz_box, lipschitz_estimate, simulate, simulate_ode, CutoffPhi,
    CutoffPsi, DiffusionVector, LipschitzEstimate, OdeTrajectory, SampleRecord, SimConfig,
    Trajectory,
};
