//! Named verification experiments.
//!
//! Every function here is self-contained: it pins its own network, grid,
//! data, step sizes, and tolerances, and returns the inequality instances
//! it checked. Reproducing a failure is rerunning the named check; there
//! are no knobs to drift.

use crate::analysis::{
    bootstrap_schedule, fit_exponential, gronwall_ceiling, large_diffusion_k, poincare_gap,
    quasi_uniform_condition, uniform_bound_report, young_bound, b_m_bound, CheckInstance,
};
use crate::equilibria::{find_boundary_equilibria_single, solve_complex_balanced_equilibrium};
use crate::grid::{FieldState, SpatialGrid};
use crate::network::{parse_network, NonlinearitySpec};
use crate::solver::{
    averaged_residual, lipschitz_box, lipschitz_estimate, simulate, simulate_ode, CutoffPhi,
    DiffusionVector, SampleRecord, SimConfig, Trajectory,
};

use super::scenario::{bump_fields, constant_fields, normalize_averages, random_fields, Scenario};
use super::HarnessError;

/// Boolean condition as an instance: lhs is 0 when the condition held.
pub(crate) fn ok_flag(label: &str, ok: bool) -> CheckInstance {
    CheckInstance::bounded(label, if ok { 0.0 } else { 1.0 }, 0.5)
}

/// Largest increase across consecutive values; negative when the sequence
/// only ever falls.
pub(crate) fn worst_rise(values: impl Iterator<Item = f64>) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            worst = worst.max(v - p);
        }
        prev = Some(v);
    }
    worst
}

pub(crate) fn sup_field_diff(a: &FieldState, b: &FieldState) -> f64 {
    let mut sup = 0.0f64;
    for (fa, fb) in a.fields.iter().zip(&b.fields) {
        for (&x, &y) in fa.iter().zip(fb) {
            sup = sup.max((x - y).abs());
        }
    }
    sup
}

/// Sup distance of a state from a constant vector, over species and nodes.
pub(crate) fn dist_to_constant(state: &FieldState, target: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for (field, &t) in state.fields.iter().zip(target) {
        for &x in field {
            sup = sup.max((x - t).abs());
        }
    }
    sup
}

/// Sup difference across every diagnostic column of two sampled runs.
pub(crate) fn records_sup_diff(a: &[SampleRecord], b: &[SampleRecord]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    fn vec_gap(x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(&p, &q)| (p - q).abs())
            .fold(0.0f64, f64::max)
    }
    let mut sup = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        sup = sup.max(vec_gap(&ra.l1, &rb.l1));
        sup = sup.max(vec_gap(&ra.l2, &rb.l2));
        sup = sup.max(vec_gap(&ra.linf, &rb.linf));
        sup = sup.max(vec_gap(&ra.avg, &rb.avg));
        sup = sup.max(vec_gap(&ra.dev_l2, &rb.dev_l2));
        sup = sup.max(vec_gap(&ra.dev_linf, &rb.dev_linf));
        sup = sup.max((ra.t - rb.t).abs());
        sup = sup.max((ra.sum_linf - rb.sum_linf).abs());
        sup = sup.max((ra.total_mass - rb.total_mass).abs());
    }
    sup
}

fn sup_linf_over_run(traj: &Trajectory) -> f64 {
    traj.records
        .iter()
        .flat_map(|r| r.linf.iter().copied())
        .fold(0.0f64, f64::max)
}

/// Total mass of a dissipative binding network, sampled every step, must
/// never rise beyond roundoff.
pub fn mass_dissipation() -> Result<Vec<CheckInstance>, HarnessError> {
    let scenario = Scenario::resolve("mass-dissipation-smoke")?;
    let config = scenario.build()?;
    let traj = simulate(&config)?;
    let rise = worst_rise(traj.records.iter().map(|r| r.total_mass));
    let first = traj.records.first().map(|r| r.total_mass).unwrap_or(0.0);
    let last = traj.records.last().map(|r| r.total_mass).unwrap_or(0.0);
    Ok(vec![
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded("largest per-step total-mass rise", rise, 1e-10),
        CheckInstance::bounded("final mass at or below initial mass", last, first + 1e-10),
        CheckInstance::strict("mass actually moved (test is not vacuous)", last, first),
    ])
}

/// With one shared diffusion coefficient the summed state obeys a discrete
/// maximum principle: its sup norm is nonincreasing step by step.
pub fn equal_diffusion_max_principle() -> Result<Vec<CheckInstance>, HarnessError> {
    let grid = SpatialGrid::new(vec![1.0], vec![32])?;
    let net = parse_network("A <-> B @ 1.0, 1.0")?;
    let fields = random_fields(&grid, 2, 0.0, 2.0, 5);
    let mut config = SimConfig::new(
        grid,
        NonlinearitySpec::MassAction(net),
        DiffusionVector::new(vec![2.0, 2.0])?,
        FieldState::new(fields),
        1e-3,
        1.0,
    );
    config.sample_stride = 1;
    let traj = simulate(&config)?;
    let rise = worst_rise(traj.records.iter().map(|r| r.sum_linf));
    let first = traj.records.first().map(|r| r.sum_linf).unwrap_or(0.0);
    let last = traj.records.last().map(|r| r.sum_linf).unwrap_or(0.0);
    Ok(vec![
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded("largest per-step rise of the summed sup norm", rise, 1e-10),
        CheckInstance::strict("sup norm of the sum actually contracted", last, first),
    ])
}

/// The estimated parabolic-regularity constant scales like one over the
/// diffusion coefficient: the product `c_hat(d) * d` is flat across a
/// three-octave sweep.
pub fn regularity_scaling() -> Result<Vec<CheckInstance>, HarnessError> {
    let grid = SpatialGrid::new(vec![1.0], vec![64])?;
    let base = grid.estimate_regularity_constant(1.0, 2.0, 1.0, 0.02, 4, 1234)?;
    let mut instances = vec![CheckInstance::bounded(
        "unit-diffusion constant within its spectral bound",
        base.c_hat,
        1.01,
    )];
    let reference = base.c_hat;
    for d in [2.0, 4.0, 8.0] {
        let est = grid.estimate_regularity_constant(d, 2.0, 1.0, 0.02, 4, 1234)?;
        let product = est.c_hat * d;
        instances.push(CheckInstance::bounded(
            &format!("d={d}: scaled constant at least 0.8 of the unit run")[..],
            0.8 * reference,
            product,
        ));
        instances.push(CheckInstance::bounded(
            &format!("d={d}: scaled constant at most 1.2 of the unit run")[..],
            product,
            1.2 * reference,
        ));
    }
    Ok(instances)
}

/// The discrete spectral gap converges to `pi^2 / L^2` at second order:
/// halving the spacing cuts the error by about four.
pub fn spectral_gap_refinement() -> Result<Vec<CheckInstance>, HarnessError> {
    let exact = std::f64::consts::PI.powi(2);
    let error = |n: usize| -> Result<f64, HarnessError> {
        let grid = SpatialGrid::new(vec![1.0], vec![n])?;
        Ok((grid.poincare_constant() - exact).abs())
    };
    let e32 = error(32)?;
    let e64 = error(64)?;
    let e128 = error(128)?;
    let fine = SpatialGrid::new(vec![1.0], vec![128])?;
    let mut instances = vec![CheckInstance::strict(
        "discrete gap sits below the continuum value",
        fine.poincare_constant(),
        exact,
    )];
    for (label, ratio) in [("32 to 64", e32 / e64), ("64 to 128", e64 / e128)] {
        instances.push(CheckInstance::bounded(
            &format!("refinement {label}: error ratio at least 3.5")[..],
            3.5,
            ratio,
        ));
        instances.push(CheckInstance::bounded(
            &format!("refinement {label}: error ratio at most 4.5")[..],
            ratio,
            4.5,
        ));
    }
    Ok(instances)
}

/// On a short box with fast diffusion the deviation from the spatial
/// averages collapses exponentially, at a rate clearing the spectral gap
/// minus the reaction's box Lipschitz constant.
pub fn averages_collapse() -> Result<Vec<CheckInstance>, HarnessError> {
    let scenario = Scenario::resolve("averages-collapse")?;
    let config = scenario.build()?;
    let traj = simulate(&config)?;
    let c_m = lipschitz_box(&config.nonlinearity, 4.0, 200, 7);
    let c_omega = config.grid.poincare_constant();
    let d_min = config.diffusion.min();
    let delta = poincare_gap(d_min, c_omega, c_m);
    let deviation: Vec<f64> = traj
        .records
        .iter()
        .map(|r| r.dev_l2.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let fit = fit_exponential(&traj.times, &deviation, 0.02, 0.5)?;
    Ok(vec![
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::strict("spectral gap minus reaction slope is positive", 0.0, delta),
        CheckInstance::strict("fitted collapse rate is positive", 0.0, fit.rate),
        CheckInstance::bounded("log-linear fit quality at least 0.99", 0.99, fit.r_squared),
        CheckInstance::bounded(
            "squared-norm collapse rate clears 0.8 of the gap",
            0.8 * delta,
            2.0 * fit.rate,
        ),
    ])
}

/// The averaged reaction term drifts from the reaction of the averages by
/// a quadratic-in-deviation residual, so that residual decays at roughly
/// twice the collapse rate. Checked on an autocatalytic pair.
pub fn averaged_residual_decay() -> Result<Vec<CheckInstance>, HarnessError> {
    let grid = SpatialGrid::new(vec![0.2], vec![32])?;
    let net = parse_network("A + B <-> 2 B @ 1.0, 2.0")?;
    let fields = bump_fields(
        &grid,
        &[1.5, 1.5],
        &[0.4, 0.35],
        &[vec![0.06], vec![0.14]],
        &[0.03, 0.04],
    )?;
    let spec = NonlinearitySpec::MassAction(net);
    let mut config = SimConfig::new(
        grid,
        spec,
        DiffusionVector::new(vec![2.0, 2.4])?,
        FieldState::new(fields),
        5e-5,
        0.4,
    );
    config.sample_stride = 10;
    config.store_fields = true;
    let traj = simulate(&config)?;
    let states = traj.states.as_ref().expect("fields were stored");
    let residual: Vec<f64> = states
        .iter()
        .map(|state| {
            averaged_residual(&config.grid, &state.fields, &config.nonlinearity)
                .iter()
                .fold(0.0f64, |a, &g| a.max(g.abs()))
        })
        .collect();
    let fit = fit_exponential(&traj.times, &residual, 0.005, 0.4)?;
    Ok(vec![
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::strict(
            "initial residual is visible (test is not vacuous)",
            1e-6,
            residual[0],
        ),
        CheckInstance::strict("fitted residual-decay rate is positive", 0.0, fit.rate),
        CheckInstance::bounded("log-linear fit quality at least 0.95", 0.95, fit.r_squared),
    ])
}

/// A cycle network settles onto its complex-balanced state: the limit
/// matches the algebraic solve to 1e-5 everywhere and the relative entropy
/// never rises along the way.
pub fn complex_balance_convergence() -> Result<Vec<CheckInstance>, HarnessError> {
    let scenario = Scenario::resolve("complex-balance-cycle")?;
    let config = scenario.build()?;
    let net = config.nonlinearity.network().expect("mass-action scenario");
    let eq = solve_complex_balanced_equilibrium(net, &[1.2, 0.9, 0.9])?;
    let eq_dist = eq
        .u_inf
        .iter()
        .map(|&x| (x - 1.0).abs())
        .fold(0.0f64, f64::max);
    let traj = simulate(&config)?;
    let final_dist = dist_to_constant(&traj.final_state, &eq.u_inf);
    let entropy_rise = worst_rise(traj.records.iter().map(|r| r.entropy.unwrap_or(f64::NAN)));
    let first_entropy = traj.records.first().and_then(|r| r.entropy).unwrap_or(0.0);
    let last_entropy = traj.records.last().and_then(|r| r.entropy).unwrap_or(0.0);
    Ok(vec![
        CheckInstance::bounded("algebraic equilibrium is the flat unit state", eq_dist, 1e-10),
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded(
            "final state within 1e-5 of the equilibrium everywhere",
            final_dist,
            1e-5,
        ),
        CheckInstance::bounded("largest per-sample entropy rise", entropy_rise, 1e-9),
        CheckInstance::strict("entropy strictly fell overall", last_entropy, first_entropy),
    ])
}

/// An autocatalytic pair has a boundary steady state next to its positive
/// one. The solver finds the boundary state, and the flow from interior
/// data keeps clear of it and lands on the positive state instead.
pub fn boundary_repulsion() -> Result<Vec<CheckInstance>, HarnessError> {
    let grid = SpatialGrid::new(vec![1.0], vec![32])?;
    let net = parse_network("A + B <-> 2 B @ 1.0, 2.0")?;
    let interior = solve_complex_balanced_equilibrium(&net, &[1.5, 1.5])?;
    let boundary = find_boundary_equilibria_single(&net, &[1.5, 1.5])?;
    let boundary_found = boundary.len() == 1
        && (boundary[0].u_inf[0] - 3.0).abs() <= 1e-10
        && boundary[0].u_inf[1] == 0.0;
    // net flow of the autocatalytic species just off the boundary corner
    let inward = net.evaluate_f(&[3.0, 0.01])?[1];

    let mut fields = bump_fields(
        &grid,
        &[1.5, 1.5],
        &[0.3, -0.25],
        &[vec![0.35], vec![0.65]],
        &[0.1, 0.12],
    )?;
    normalize_averages(&grid, &mut fields, &[1.5, 1.5])?;
    let mut config = SimConfig::new(
        grid,
        NonlinearitySpec::MassAction(net),
        DiffusionVector::new(vec![1.0, 2.0])?,
        FieldState::new(fields),
        5e-4,
        15.0,
    );
    config.sample_stride = 10;
    let traj = simulate(&config)?;
    let report = uniform_bound_report(&traj);
    let tail = report.tail_ratio.iter().fold(0.0f64, |a, &b| a.max(b));
    let final_dist = dist_to_constant(&traj.final_state, &interior.u_inf);
    // closest the averaged state ever gets to the boundary point
    let boundary_gap = traj
        .records
        .iter()
        .map(|r| {
            r.avg
                .iter()
                .zip(&[3.0, 0.0])
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min);

    let interior_dist = (interior.u_inf[0] - 2.0)
        .abs()
        .max((interior.u_inf[1] - 1.0).abs());
    Ok(vec![
        CheckInstance::bounded("positive equilibrium is (2,1)", interior_dist, 1e-10),
        ok_flag("boundary steady state (3,0) detected", boundary_found),
        CheckInstance::strict("reaction pushes away from the boundary corner", 0.0, inward),
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded(
            "final state within 1e-4 of the positive equilibrium",
            final_dist,
            1e-4,
        ),
        CheckInstance::bounded("late-run sup norms stopped growing", tail, 1.05),
        CheckInstance::strict(
            "averages keep a clear margin from the boundary state",
            0.5,
            boundary_gap,
        ),
    ])
}

/// Small data under an exponentially growing nonlinearity stays small for
/// a long horizon and its declared energy functional never rises.
pub fn small_data_global() -> Result<Vec<CheckInstance>, HarnessError> {
    let scenario = Scenario::resolve("small-data-builtin")?;
    let config = scenario.build()?;
    let traj = simulate(&config)?;
    let eps = 0.05;
    let sup = sup_linf_over_run(&traj);
    let energy_rise = worst_rise(traj.records.iter().map(|r| r.lyapunov.unwrap_or(f64::NAN)));
    let first = traj.records.first().and_then(|r| r.lyapunov).unwrap_or(0.0);
    let last = traj.records.last().and_then(|r| r.lyapunov).unwrap_or(0.0);
    Ok(vec![
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded("sup norm stays within ten times the data size", sup, 10.0 * eps),
        CheckInstance::bounded("largest per-sample energy rise", energy_rise, 1e-8),
        CheckInstance::strict("energy strictly fell overall", last, first),
    ])
}

/// A reaction cutoff wide enough to contain the whole trajectory changes
/// nothing: every diagnostic and the final fields agree with the uncut run
/// to roundoff.
pub fn truncation_consistency() -> Result<Vec<CheckInstance>, HarnessError> {
    let make = |radius: Option<f64>| -> Result<Trajectory, HarnessError> {
        let grid = SpatialGrid::new(vec![1.0], vec![32])?;
        let net = parse_network("A + B <-> 2 B @ 1.0, 2.0")?;
        let fields = bump_fields(
            &grid,
            &[2.0, 1.0],
            &[0.3, 0.2],
            &[vec![0.3], vec![0.7]],
            &[0.1, 0.12],
        )?;
        let mut config = SimConfig::new(
            grid,
            NonlinearitySpec::MassAction(net),
            DiffusionVector::new(vec![1.0, 2.0])?,
            FieldState::new(fields),
            1e-3,
            2.0,
        );
        config.sample_stride = 1;
        if let Some(r) = radius {
            config.truncation = Some(CutoffPhi::new(r)?);
        }
        Ok(simulate(&config)?)
    };
    let plain = make(None)?;
    let truncated = make(Some(10.0))?;
    let record_diff = records_sup_diff(&plain.records, &truncated.records);
    let field_diff = sup_field_diff(&plain.final_state, &truncated.final_state);
    Ok(vec![
        ok_flag("plain run finished without blow-up", !plain.blew_up),
        CheckInstance::bounded("diagnostics agree with the cutoff installed", record_diff, 1e-10),
        CheckInstance::bounded("final fields agree with the cutoff installed", field_diff, 1e-10),
    ])
}

/// Closed-form exponent bookkeeping: ladder tables, window counts, and the
/// product-splitting bounds, all against hand-computed values.
pub fn exponent_tables() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut instances = Vec::new();

    let s12 = bootstrap_schedule(1, 2.0)?;
    instances.push(ok_flag(
        "1d quadratic ladder is 1, 1.5, 2.25",
        s12.q == vec![1.0, 1.5, 2.25] && s12.k_steps() == 2,
    ));
    instances.push(ok_flag(
        "1d quadratic refinement is 2.25, 4.5 and reaches its target",
        s12.p == vec![2.25, 4.5] && s12.k0_steps() == 1 && s12.p_reached_target,
    ));

    let s22 = bootstrap_schedule(2, 2.0)?;
    let expect = [1.0, 4.0 / 3.0, 16.0 / 9.0, 64.0 / 27.0];
    let s22_ok = s22.k_steps() == 3
        && s22
            .q
            .iter()
            .zip(&expect)
            .all(|(a, b)| (a - b).abs() < 1e-12);
    instances.push(ok_flag("2d quadratic ladder climbs three rungs", s22_ok));

    let s11 = bootstrap_schedule(1, 1.0)?;
    instances.push(ok_flag(
        "linear growth needs no rungs",
        s11.q == vec![1.0] && s11.k_steps() == 0 && s11.p_reached_target,
    ));

    instances.push(ok_flag(
        "window counts across dimensions 1, 2, 4",
        large_diffusion_k(1) == (0, 2)
            && large_diffusion_k(2) == (1, 3)
            && large_diffusion_k(4) == (2, 4),
    ));

    instances.push(CheckInstance::bounded(
        "product bound at the symmetric point equals one",
        (young_bound(0.5, 1.0)? - 1.0).abs(),
        1e-15,
    ));
    // spot check that the closed form really dominates the product
    let (eps, amp, x, y) = (0.3f64, 2.0f64, 1.7f64, 0.4f64);
    let dominated = eps * x.powf(1.0 / eps) + young_bound(eps, amp)? * y.powf(1.0 / (1.0 - eps));
    instances.push(CheckInstance::bounded(
        "split bound dominates the raw product at a spot check",
        amp * x * y,
        dominated,
    ));

    instances.push(CheckInstance::bounded(
        "growth ceiling hand value",
        (gronwall_ceiling(2.0, 1.0, 0.5, 1) - 2.0 * 1.0f64.exp()).abs(),
        1e-12,
    ));
    instances.push(CheckInstance::bounded(
        "mass ceiling hand value",
        (b_m_bound(1.0, 1.0, 0, 1.0, 0.5)? - 9.0).abs(),
        1e-12,
    ));

    let pi2 = std::f64::consts::PI.powi(2);
    instances.push(CheckInstance::bounded(
        "gap formula hand value",
        (poincare_gap(1.0, pi2, 2.0) - (2.0 * pi2 - 2.0)).abs(),
        1e-12,
    ));

    // smaller-base powers stay under the doubled larger base through the
    // whole table the window argument uses
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=6u32 {
        for k in 0..=8u32 {
            let lhs = ((n + 1) as f64).powi(k as i32);
            let rhs = 2.0 * ((n + 2) as f64).powi(k as i32);
            worst = worst.max(lhs / rhs);
        }
    }
    instances.push(CheckInstance::strict(
        "smaller-base powers stay under the doubled larger base",
        worst,
        1.0,
    ));

    Ok(instances)
}

/// Sampled growth-window bound: with the slowest diffusion normalized away
/// and the cutoff reaction's through-origin slope below the unit budget,
/// the sup norm over the whole window stays under the exponential ceiling.
pub fn growth_window_ceiling() -> Result<Vec<CheckInstance>, HarnessError> {
    let net = parse_network("A <-> B @ 1.0, 1.0")?;
    let mu = net.growth_exponent();
    let spec = NonlinearitySpec::MassAction(net);
    let cutoff = CutoffPhi::new(4.0)?;
    let estimate = lipschitz_estimate(&spec, &cutoff, None, 4000, 99);
    let l_r = estimate.l_r;
    let d_min = l_r.max(1.0);
    let a = 1.0 / d_min;

    let schedule = bootstrap_schedule(1, mu)?;
    let k = schedule.k_steps();
    let window = (k + 1) as f64;

    let grid = SpatialGrid::new(vec![1.0], vec![32])?;
    let fields = bump_fields(
        &grid,
        &[2.0, 1.0],
        &[0.25, 0.2],
        &[vec![0.3], vec![0.7]],
        &[0.1, 0.12],
    )?;
    let m0 = fields
        .iter()
        .flat_map(|f| f.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max);
    let mut config = SimConfig::new(
        grid,
        spec,
        DiffusionVector::new(vec![d_min, 1.2 * d_min])?,
        FieldState::new(fields),
        1e-3,
        window,
    );
    config.sample_stride = 1;
    config.rescale_by_dmin = true;
    config.truncation = Some(cutoff);
    let traj = simulate(&config)?;
    let measured = sup_linf_over_run(&traj);
    let ceiling = gronwall_ceiling(m0, a, l_r, k);
    Ok(vec![
        CheckInstance::bounded("rescaled reaction slope within the unit budget", a * l_r, 1.0),
        ok_flag("linear growth asks for a single unit window", k == 0),
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded(
            "sup norm over the window stays under the ceiling",
            measured,
            1.001 * ceiling,
        ),
        CheckInstance::strict("ceiling is finite and positive", 0.0, ceiling),
    ])
}

/// Spatially flat data reduces the full solver to the reaction flow: the
/// per-species averages track a high-order integration of the plain
/// reaction system, and no spatial texture appears.
pub fn ode_limit_agreement() -> Result<Vec<CheckInstance>, HarnessError> {
    let net = parse_network("A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0")?;
    let spec = NonlinearitySpec::MassAction(net);
    let u0 = [1.3, 0.9, 0.8];
    let dt = 2.5e-4;
    let t_end = 5.0;
    let stride = 40;

    let grid = SpatialGrid::new(vec![1.0], vec![16])?;
    let fields = constant_fields(&grid, &u0);
    let mut config = SimConfig::new(
        grid,
        spec.clone(),
        DiffusionVector::new(vec![1.0, 2.0, 3.0])?,
        FieldState::new(fields),
        dt,
        t_end,
    );
    config.sample_stride = stride;
    let pde = simulate(&config)?;
    let ode = simulate_ode(&spec, &u0, dt, t_end, stride)?;

    let aligned = pde.times.len() == ode.times.len();
    let clock_skew = if aligned {
        pde.times
            .iter()
            .zip(&ode.times)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max)
    } else {
        f64::INFINITY
    };
    let mut tracking = 0.0f64;
    if aligned {
        for (record, state) in pde.records.iter().zip(&ode.states) {
            for i in 0..3 {
                tracking = tracking.max((record.avg[i] - state[i]).abs());
            }
        }
    }
    let texture = pde
        .records
        .iter()
        .flat_map(|r| r.dev_linf.iter().copied())
        .fold(0.0f64, f64::max);
    Ok(vec![
        ok_flag("sample clocks align", aligned),
        CheckInstance::bounded("sample times agree", clock_skew, 1e-12),
        CheckInstance::bounded(
            "averages track the reaction flow within 1e-3",
            tracking,
            1e-3,
        ),
        CheckInstance::bounded("flat data grows no spatial texture", texture, 1e-12),
    ])
}

/// Perturbing a positive equilibrium and integrating in shifted
/// coordinates: the run matches the unshifted one to roundoff, relaxes
/// back exponentially, and lands on the equilibrium.
pub fn shift_relaxation() -> Result<Vec<CheckInstance>, HarnessError> {
    let scenario = Scenario::resolve("close-to-equilibrium")?;
    let config = scenario.build()?;
    let u_inf = [2.0, 1.0];
    let traj = simulate(&config)?;
    let states = traj.states.as_ref().expect("fields were stored");
    let dist: Vec<f64> = states.iter().map(|s| dist_to_constant(s, &u_inf)).collect();
    let sup_dist = dist.iter().fold(0.0f64, |a, &b| a.max(b));
    let final_dist = dist.last().copied().unwrap_or(f64::INFINITY);
    let fit = fit_exponential(&traj.times, &dist, 1.0, 5.0)?;

    let mut plain = config.clone();
    plain.shift = None;
    plain.store_fields = false;
    let unshifted = simulate(&plain)?;
    let device_diff = sup_field_diff(&traj.final_state, &unshifted.final_state);

    Ok(vec![
        ok_flag("run finished without blow-up", !traj.blew_up),
        CheckInstance::bounded(
            "shifted and plain integrations agree to roundoff",
            device_diff,
            1e-12,
        ),
        CheckInstance::strict("fitted relaxation rate is positive", 0.0, fit.rate),
        CheckInstance::bounded("log-linear fit quality at least 0.95", 0.95, fit.r_squared),
        CheckInstance::bounded(
            "never strays past ten times the initial offset",
            sup_dist,
            0.5,
        ),
        CheckInstance::bounded("lands on the equilibrium", final_dist, 1e-8),
    ])
}

/// Smallness condition for a nearly uniform diffusion spread: half the
/// spread times the measured regularity constant stays below one on every
/// ladder rung.
pub fn quasi_uniform_margin() -> Result<Vec<CheckInstance>, HarnessError> {
    let (d_min, d_max) = (1.0, 1.2);
    let d_mid = 0.5 * (d_min + d_max);
    let schedule = bootstrap_schedule(1, 2.0)?;
    let grid = SpatialGrid::new(vec![1.0], vec![64])?;
    let mut constants = Vec::new();
    for q in &schedule.q[1..] {
        let dual = q / (q - 1.0);
        let est = grid.estimate_regularity_constant(d_mid, dual, 1.0, 0.02, 4, 4321)?;
        constants.push((dual, est.c_hat));
    }
    let report = quasi_uniform_condition(d_min, d_max, &constants);
    let mut instances = vec![ok_flag(
        "ladder produced rungs to check",
        !report.instances.is_empty(),
    )];
    instances.extend(report.instances);
    Ok(instances)
}
