//! Time integration of reaction-diffusion systems and the sampled constants
//! (Lipschitz bounds, averaged-dynamics residuals) that the analysis layer
//! consumes.
//!
//! The march is IMEX: one explicit Euler stage for the reaction term
//! followed by one backward Euler diffusion solve per species. The implicit
//! half is unconditionally stable and realizes a discrete maximum
//! principle, so every qualitative bound certified here comes from the
//! reaction stage alone. Mass-action steps that would push a concentration
//! below zero are rejected and retried as two half steps; states that grow
//! past the ceiling mark the trajectory as blown up instead of erroring.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::equilibria::relative_entropy_field;
use crate::grid::{FieldState, GridError, SpatialGrid};
use crate::network::{LyapunovHint, NetworkError, NonlinearitySpec};

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    BadTimeStep(f64),
    BadHorizon(f64),
    BadCeiling(f64),
    BadCutoffRadius(f64),
    BadReference(f64),
    EmptyDiffusion,
    BadDiffusionCoefficient(f64),
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    PositivityFailure {
        time: f64,
        minimum: f64,
    },
    Grid(GridError),
    Network(NetworkError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::BadTimeStep(dt) => write!(f, "time step {dt} is not positive"),
            SolverError::BadHorizon(t) => write!(f, "horizon {t} is not positive"),
            SolverError::BadCeiling(c) => write!(f, "blow-up ceiling {c} is not positive"),
            SolverError::BadCutoffRadius(r) => write!(f, "cutoff radius {r} is not positive"),
            SolverError::BadReference(x) => {
                write!(f, "entropy reference component {x} is not positive")
            }
            SolverError::EmptyDiffusion => write!(f, "diffusion vector is empty"),
            SolverError::BadDiffusionCoefficient(d) => {
                write!(f, "diffusion coefficient {d} is not positive")
            }
            SolverError::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected {expected} entries, got {got}"),
            SolverError::PositivityFailure { time, minimum } => write!(
                f,
                "positivity could not be restored near t = {time} (minimum {minimum:e})"
            ),
            SolverError::Grid(e) => write!(f, "{e}"),
            SolverError::Network(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<GridError> for SolverError {
    fn from(e: GridError) -> Self {
        SolverError::Grid(e)
    }
}

impl From<NetworkError> for SolverError {
    fn from(e: NetworkError) -> Self {
        SolverError::Network(e)
    }
}

/// Per-species diffusion coefficients, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionVector {
    coeffs: Vec<f64>,
}

impl DiffusionVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, SolverError> {
        if coeffs.is_empty() {
            return Err(SolverError::EmptyDiffusion);
        }
        for &d in &coeffs {
            if !(d > 0.0) || !d.is_finite() {
                return Err(SolverError::BadDiffusionCoefficient(d));
            }
        }
        Ok(DiffusionVector { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.coeffs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.coeffs.iter().copied().fold(0.0, f64::max)
    }
}

/// `3 s^2 - 2 s^3` clamped to [0, 1]; rises monotonically with maximal
/// slope 3/2 at `s = 1/2`.
fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * (3.0 - 2.0 * s)
    }
}

fn smoothstep_slope(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        6.0 * s * (1.0 - s)
    }
}

/// Delayed-onset time cutoff: 0 up to `tau`, smooth rise over one unit,
/// 1 from `tau + 1` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPsi {
    tau: f64,
}

impl CutoffPsi {
    pub fn new(tau: f64) -> Self {
        CutoffPsi { tau }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eval(&self, t: f64) -> f64 {
        smoothstep(t - self.tau)
    }

    pub fn slope(&self, t: f64) -> f64 {
        smoothstep_slope(t - self.tau)
    }
}

/// Radial state-space cutoff: identically 1 on the ball of radius `r`,
/// smooth descent on the annulus `r < |x| < 2r`, identically 0 outside.
/// The gradient magnitude never exceeds `3 / (2 r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPhi {
    radius: f64,
}

impl CutoffPhi {
    pub fn new(radius: f64) -> Result<Self, SolverError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SolverError::BadCutoffRadius(radius));
        }
        Ok(CutoffPhi { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Value as a function of the Euclidean norm.
    pub fn eval_norm(&self, s: f64) -> f64 {
        if s <= self.radius {
            1.0
        } else {
            1.0 - smoothstep((s - self.radius) / self.radius)
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_norm(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// Everything one IMEX run needs. Build with [`SimConfig::new`] and adjust
/// the public knobs before calling [`simulate`].
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: SpatialGrid,
    pub nonlinearity: NonlinearitySpec,
    pub diffusion: DiffusionVector,
    pub initial: FieldState,
    pub dt: f64,
    pub t_end: f64,
    /// Record every k-th step (step 0 and the final step always record).
    pub sample_stride: usize,
    /// Reaction-term truncation applied to the internal (shifted) state.
    pub truncation: Option<CutoffPhi>,
    /// Divide the whole right-hand side by the smallest diffusion
    /// coefficient, so the slowest species diffuses at unit rate.
    pub rescale_by_dmin: bool,
    /// Constant reference state subtracted internally; fields and
    /// diagnostics still report the physical values.
    pub shift: Option<Vec<f64>>,
    /// Sup-norm threshold beyond which the trajectory is declared blown up.
    pub ceiling: f64,
    /// When set, every sample carries the relative entropy against this
    /// positive constant state.
    pub entropy_reference: Option<Vec<f64>>,
    /// Keep a full copy of the fields at every sample time.
    pub store_fields: bool,
}

impl SimConfig {
    pub fn new(
        grid: SpatialGrid,
        nonlinearity: NonlinearitySpec,
        diffusion: DiffusionVector,
        initial: FieldState,
        dt: f64,
        t_end: f64,
    ) -> Self {
        SimConfig {
            grid,
            nonlinearity,
            diffusion,
            initial,
            dt,
            t_end,
            sample_stride: 1,
            truncation: None,
            rescale_by_dmin: false,
            shift: None,
            ceiling: 1e8,
            entropy_reference: None,
            store_fields: false,
        }
    }
}

/// Diagnostics of one sampled time. Norms and averages are of the physical
/// state; deviation norms are against the per-species spatial average.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub t: f64,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    pub avg: Vec<f64>,
    pub dev_l2: Vec<f64>,
    pub dev_linf: Vec<f64>,
    /// Sup norm of the pointwise sum of all species.
    pub sum_linf: f64,
    /// Signed integral of the summed state, `|domain| * sum_i avg_i`.
    pub total_mass: f64,
    pub entropy: Option<f64>,
    pub lyapunov: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub records: Vec<SampleRecord>,
    /// Full fields at each sample time when `store_fields` was set.
    pub states: Option<Vec<FieldState>>,
    pub final_state: FieldState,
    pub final_time: f64,
    pub blew_up: bool,
    pub blow_up_time: Option<f64>,
}

struct Stepper<'a> {
    grid: &'a SpatialGrid,
    spec: &'a NonlinearitySpec,
    cutoff: Option<&'a CutoffPhi>,
    z0: &'a [f64],
    d_eff: &'a [f64],
    scale: f64,
    enforce_positivity: bool,
}

impl Stepper<'_> {
    /// Advance `w` by one IMEX step of size `dt`, splitting into half
    /// steps when a mass-action state would leave the nonnegative orthant.
    fn advance(&self, w: &mut [Vec<f64>], dt: f64, t: f64, depth: u32) -> Result<(), SolverError> {
        let m = w.len();
        let nodes = w[0].len();
        let mut ustar = vec![vec![0.0; nodes]; m];
        let mut state = vec![0.0; m];
        let mut f = vec![0.0; m];
        for x in 0..nodes {
            for i in 0..m {
                state[i] = w[i][x];
            }
            let phi = match self.cutoff {
                Some(c) => c.eval(&state),
                None => 1.0,
            };
            for i in 0..m {
                state[i] += self.z0[i];
            }
            self.spec.evaluate_into(&state, &mut f);
            let amp = dt * self.scale * phi;
            for i in 0..m {
                ustar[i][x] = w[i][x] + amp * f[i];
            }
        }
        let mut w_new: Vec<Vec<f64>> = Vec::with_capacity(m);
        for i in 0..m {
            w_new.push(self.grid.heat_solve_implicit(&ustar[i], self.d_eff[i], dt)?);
        }
        if self.enforce_positivity {
            let mut lowest = f64::INFINITY;
            for i in 0..m {
                for &v in &w_new[i] {
                    let u = v + self.z0[i];
                    if u < lowest {
                        lowest = u;
                    }
                }
            }
            if lowest < -1e-12 {
                if depth >= 20 {
                    return Err(SolverError::PositivityFailure {
                        time: t,
                        minimum: lowest,
                    });
                }
                let half = 0.5 * dt;
                self.advance(w, half, t, depth + 1)?;
                self.advance(w, half, t + half, depth + 1)?;
                return Ok(());
            }
        }
        for i in 0..m {
            w[i].copy_from_slice(&w_new[i]);
        }
        Ok(())
    }
}

fn validate_config(config: &SimConfig) -> Result<(), SolverError> {
    let m = config.nonlinearity.species_count();
    let nodes = config.grid.node_count();
    if config.diffusion.len() != m {
        return Err(SolverError::DimensionMismatch {
            what: "diffusion vector",
            expected: m,
            got: config.diffusion.len(),
        });
    }
    if config.initial.fields.len() != m {
        return Err(SolverError::DimensionMismatch {
            what: "initial fields",
            expected: m,
            got: config.initial.fields.len(),
        });
    }
    for field in &config.initial.fields {
        if field.len() != nodes {
            return Err(SolverError::DimensionMismatch {
                what: "initial field nodes",
                expected: nodes,
                got: field.len(),
            });
        }
    }
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(SolverError::BadTimeStep(config.dt));
    }
    if !(config.t_end > 0.0) || !config.t_end.is_finite() {
        return Err(SolverError::BadHorizon(config.t_end));
    }
    if !(config.ceiling > 0.0) {
        return Err(SolverError::BadCeiling(config.ceiling));
    }
    if let Some(z0) = &config.shift {
        if z0.len() != m {
            return Err(SolverError::DimensionMismatch {
                what: "shift vector",
                expected: m,
                got: z0.len(),
            });
        }
    }
    if let Some(y) = &config.entropy_reference {
        if y.len() != m {
            return Err(SolverError::DimensionMismatch {
                what: "entropy reference",
                expected: m,
                got: y.len(),
            });
        }
        for &v in y {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::BadReference(v));
            }
        }
    }
    Ok(())
}

fn make_record(
    grid: &SpatialGrid,
    t: f64,
    physical: &[Vec<f64>],
    entropy_reference: Option<&[f64]>,
    lyapunov: Option<&LyapunovHint>,
) -> SampleRecord {
    let m = physical.len();
    let nodes = physical[0].len();
    let mut l1 = Vec::with_capacity(m);
    let mut l2 = Vec::with_capacity(m);
    let mut linf = Vec::with_capacity(m);
    let mut avg = Vec::with_capacity(m);
    let mut dev_l2 = Vec::with_capacity(m);
    let mut dev_linf = Vec::with_capacity(m);
    let mut dev = vec![0.0; nodes];
    for field in physical {
        l1.push(grid.lp_norm(field, 1.0));
        l2.push(grid.lp_norm(field, 2.0));
        linf.push(grid.lp_norm(field, f64::INFINITY));
        let mean = grid.spatial_average(field);
        avg.push(mean);
        for (d, &v) in dev.iter_mut().zip(field) {
            *d = v - mean;
        }
        dev_l2.push(grid.lp_norm(&dev, 2.0));
        dev_linf.push(grid.lp_norm(&dev, f64::INFINITY));
    }
    let mut sum_linf = 0.0f64;
    for x in 0..nodes {
        let s: f64 = physical.iter().map(|f| f[x]).sum();
        sum_linf = sum_linf.max(s.abs());
    }
    let total_mass = grid.domain_measure() * avg.iter().sum::<f64>();
    let entropy = entropy_reference.map(|y| relative_entropy_field(grid, physical, y));
    let lyapunov = lyapunov.map(|hint| match hint {
        LyapunovHint::HalfSquarePlusMass { quadratic, linear } => {
            0.5 * l2[*quadratic] * l2[*quadratic] + l1[*linear]
        }
    });
    SampleRecord {
        t,
        l1,
        l2,
        linf,
        avg,
        dev_l2,
        dev_linf,
        sum_linf,
        total_mass,
        entropy,
        lyapunov,
    }
}

/// Run the IMEX march described by `config`.
///
/// Sampling happens at step 0, every `sample_stride`-th step, and the final
/// step. A state exceeding the ceiling (or turning non-finite) halts the
/// march with `blew_up` set and the last finite state preserved; it is not
/// an error. Positivity failure (mass action only, after 20 nested step
/// halvings) is an error.
pub fn simulate(config: &SimConfig) -> Result<Trajectory, SolverError> {
    validate_config(config)?;
    let grid = &config.grid;
    let m = config.nonlinearity.species_count();
    let nodes = grid.node_count();
    let zeros = vec![0.0; m];
    let z0: &[f64] = config.shift.as_deref().unwrap_or(&zeros);
    let shifted = config.shift.is_some();
    let scale = if config.rescale_by_dmin {
        1.0 / config.diffusion.min()
    } else {
        1.0
    };
    let d_eff: Vec<f64> = config.diffusion.coeffs().iter().map(|d| scale * d).collect();
    let lyapunov_hint = config.nonlinearity.lyapunov_hint();

    // internal state w = u - z0; kept equal to u verbatim when no shift is
    // configured so unshifted runs stay bitwise reproducible
    let mut w: Vec<Vec<f64>> = config
        .initial
        .fields
        .iter()
        .enumerate()
        .map(|(i, field)| {
            if shifted {
                field.iter().map(|&v| v - z0[i]).collect()
            } else {
                field.clone()
            }
        })
        .collect();

    let stepper = Stepper {
        grid,
        spec: &config.nonlinearity,
        cutoff: config.truncation.as_ref(),
        z0,
        d_eff: &d_eff,
        scale,
        enforce_positivity: config.nonlinearity.is_mass_action(),
    };

    let physical = |w: &[Vec<f64>]| -> Vec<Vec<f64>> {
        w.iter()
            .enumerate()
            .map(|(i, field)| {
                if shifted {
                    field.iter().map(|&v| v + z0[i]).collect()
                } else {
                    field.clone()
                }
            })
            .collect()
    };

    let steps = ((config.t_end / config.dt).round() as usize).max(1);
    let stride = config.sample_stride.max(1);
    let mut times = Vec::new();
    let mut records = Vec::new();
    let mut states: Option<Vec<FieldState>> = config.store_fields.then(Vec::new);
    let record_at = |t: f64,
                         w: &[Vec<f64>],
                         times: &mut Vec<f64>,
                         records: &mut Vec<SampleRecord>,
                         states: &mut Option<Vec<FieldState>>| {
        let phys = physical(w);
        records.push(make_record(
            grid,
            t,
            &phys,
            config.entropy_reference.as_deref(),
            lyapunov_hint.as_ref(),
        ));
        times.push(t);
        if let Some(list) = states {
            list.push(FieldState::new(phys));
        }
    };
    record_at(0.0, &w, &mut times, &mut records, &mut states);

    let mut prev = w.clone();
    let mut blew_up = false;
    let mut blow_up_time = None;
    let mut final_time = 0.0;
    for step in 1..=steps {
        for (p, cur) in prev.iter_mut().zip(&w) {
            p.copy_from_slice(cur);
        }
        let t0 = (step - 1) as f64 * config.dt;
        stepper.advance(&mut w, config.dt, t0, 0)?;
        let t = step as f64 * config.dt;
        let mut sup = 0.0f64;
        let mut finite = true;
        for (i, field) in w.iter().enumerate() {
            for &v in field {
                let u = v + z0[i];
                if !u.is_finite() {
                    finite = false;
                }
                sup = sup.max(u.abs());
            }
        }
        if !finite || sup > config.ceiling {
            blew_up = true;
            blow_up_time = Some(t);
            std::mem::swap(&mut w, &mut prev);
            final_time = t0;
            if times.last().copied() != Some(t0) {
                record_at(t0, &w, &mut times, &mut records, &mut states);
            }
            break;
        }
        final_time = t;
        if step % stride == 0 || step == steps {
            record_at(t, &w, &mut times, &mut records, &mut states);
        }
    }

    debug_assert_eq!(w.len(), m);
    debug_assert!(w.iter().all(|f| f.len() == nodes));
    Ok(Trajectory {
        times,
        records,
        states,
        final_state: FieldState::new(physical(&w)),
        final_time,
        blew_up,
        blow_up_time,
    })
}

/// Spatially homogeneous trajectory of the reaction alone, integrated with
/// the classical fourth-order Runge-Kutta scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl OdeTrajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least the initial state")
    }
}

pub fn simulate_ode(
    spec: &NonlinearitySpec,
    u0: &[f64],
    dt: f64,
    t_end: f64,
    sample_stride: usize,
) -> Result<OdeTrajectory, SolverError> {
    let m = spec.species_count();
    if u0.len() != m {
        return Err(SolverError::DimensionMismatch {
            what: "initial state",
            expected: m,
            got: u0.len(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SolverError::BadTimeStep(dt));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(SolverError::BadHorizon(t_end));
    }
    let steps = ((t_end / dt).round() as usize).max(1);
    let stride = sample_stride.max(1);
    let mut u = u0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![u.clone()];
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut stage = vec![0.0; m];
    for step in 1..=steps {
        spec.evaluate_into(&u, &mut k1);
        for i in 0..m {
            stage[i] = u[i] + 0.5 * dt * k1[i];
        }
        spec.evaluate_into(&stage, &mut k2);
        for i in 0..m {
            stage[i] = u[i] + 0.5 * dt * k2[i];
        }
        spec.evaluate_into(&stage, &mut k3);
        for i in 0..m {
            stage[i] = u[i] + dt * k3[i];
        }
        spec.evaluate_into(&stage, &mut k4);
        for i in 0..m {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(u.clone());
        }
    }
    Ok(OdeTrajectory { times, states })
}

/// Gap between the averaged reaction and the reaction of the average:
/// `g_i = avg_x f_i(u(x)) - f_i(avg_x u)`. Identically zero for linear
/// reactions; measures how far the spatial averages are from closing into
/// an autonomous system otherwise.
pub fn averaged_residual(
    grid: &SpatialGrid,
    fields: &[Vec<f64>],
    spec: &NonlinearitySpec,
) -> Vec<f64> {
    let m = fields.len();
    debug_assert_eq!(m, spec.species_count());
    let nodes = grid.node_count();
    let mut state = vec![0.0; m];
    let mut f = vec![0.0; m];
    let mut mean_f = vec![0.0; m];
    for x in 0..nodes {
        for i in 0..m {
            state[i] = fields[i][x];
        }
        spec.evaluate_into(&state, &mut f);
        for i in 0..m {
            mean_f[i] += f[i];
        }
    }
    for v in mean_f.iter_mut() {
        *v /= nodes as f64;
    }
    for i in 0..m {
        state[i] = grid.spatial_average(&fields[i]);
    }
    spec.evaluate_into(&state, &mut f);
    for i in 0..m {
        mean_f[i] -= f[i];
    }
    mean_f
}

/// Sampled Lipschitz data of the truncated reaction
/// `v -> phi_r(v) f(v + z0)` over the ball `|v|_2 <= 2r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    /// Largest through-origin ratio `|f~(v) - f~(0)|_inf / |v|_inf`. This
    /// is the constant the growth-window argument consumes.
    pub l_r: f64,
    /// Largest two-point ratio over consecutive sample pairs; can exceed
    /// `l_r` because the cutoff's own slope enters.
    pub pair_max: f64,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Estimate the truncated reaction's Lipschitz data by sampling.
///
/// Points are drawn uniformly from the Euclidean ball of radius `2r`
/// (direction from normalized Gaussians, radius from `2r U^{1/m}`). For
/// mass-action reactions the draw is restricted by rejection to shifted
/// states `v + z0` in the nonnegative orthant, matching where trajectories
/// actually live; built-in reactions sample the full ball.
pub fn lipschitz_estimate(
    spec: &NonlinearitySpec,
    cutoff: &CutoffPhi,
    shift: Option<&[f64]>,
    samples: usize,
    seed: u64,
) -> LipschitzEstimate {
    let m = spec.species_count();
    let zeros = vec![0.0; m];
    let z0 = shift.unwrap_or(&zeros);
    debug_assert_eq!(z0.len(), m);
    let r = cutoff.radius();
    let restrict = spec.is_mass_action();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut f = vec![0.0; m];
    let evaluate = |v: &[f64], f: &mut Vec<f64>| {
        let phi = cutoff.eval(v);
        let state: Vec<f64> = v.iter().zip(z0).map(|(a, b)| a + b).collect();
        spec.evaluate_into(&state, f);
        for x in f.iter_mut() {
            *x *= phi;
        }
    };
    let mut f0 = vec![0.0; m];
    evaluate(&zeros, &mut f0);

    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        for _ in 0..10_000 {
            let mut v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                continue;
            }
            let rad = 2.0 * r * rng.random_range(0.0f64..1.0).powf(1.0 / m as f64);
            for x in v.iter_mut() {
                *x *= rad / n;
            }
            if !restrict || v.iter().zip(z0).all(|(a, b)| a + b >= 0.0) {
                return v;
            }
        }
        vec![0.0; m]
    };

    let sup = |x: &[f64]| x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut l_r = 0.0f64;
    let mut pair_max = 0.0f64;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for _ in 0..samples {
        let v = draw(&mut rng);
        evaluate(&v, &mut f);
        let den = sup(&v);
        if den > 1e-12 {
            let num = f
                .iter()
                .zip(&f0)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            l_r = l_r.max(num / den);
        }
        if let Some((pv, pf)) = &prev {
            let dden = v
                .iter()
                .zip(pv)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            if dden > 1e-12 {
                let dnum = f
                    .iter()
                    .zip(pf)
                    .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                pair_max = pair_max.max(dnum / dden);
            }
        }
        prev = Some((v, f.clone()));
    }
    LipschitzEstimate {
        l_r,
        pair_max,
        radius: r,
        samples,
        seed,
    }
}

/// Sampled sup-norm Lipschitz constant of the raw reaction over the box
/// `[0, bound]^m`: at random interior points, central differences along
/// every sign vector estimate `max |J sigma|_inf`, whose maximum over
/// sign vectors is the Jacobian's maximal absolute row sum.
pub fn lipschitz_box(spec: &NonlinearitySpec, bound: f64, samples: usize, seed: u64) -> f64 {
    let m = spec.species_count();
    debug_assert!(bound > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5 * bound.max(1.0);
    let mut best = 0.0f64;
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    let sign_patterns: Vec<Vec<f64>> = if m <= 9 {
        (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect()
    } else {
        (0..512)
            .map(|_| {
                (0..m)
                    .map(|_| if rng.random_range(0.0f64..1.0) < 0.5 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect()
    };
    for _ in 0..samples {
        let u: Vec<f64> = (0..m).map(|_| rng.random_range(h..bound - h)).collect();
        for sigma in &sign_patterns {
            let up: Vec<f64> = u.iter().zip(sigma).map(|(a, s)| a + h * s).collect();
            let um: Vec<f64> = u.iter().zip(sigma).map(|(a, s)| a - h * s).collect();
            spec.evaluate_into(&up, &mut fp);
            spec.evaluate_into(&um, &mut fm);
            let num = fp
                .iter()
                .zip(&fm)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            best = best.max(num / (2.0 * h));
        }
    }
    best
}
