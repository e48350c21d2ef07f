//! Sampled structural invariants, one small named check per module corner.
//!
//! These are the quick spot checks behind the heavier experiments in
//! `criteria`: discrete identities, step-map bounds, convention pins, and
//! solver cross-checks. Each runs in well under a second.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{fit_exponential, young_bound, CheckInstance};
use crate::equilibria::{
    relative_entropy_field, relative_entropy_vector, solve_complex_balanced_equilibrium,
    solve_single_reversible_equilibrium,
};
use crate::grid::{FieldState, SpatialGrid};
use crate::network::{
    builtin_nonlinearity, check_quasi_positivity, monomial, parse_network, BuiltinNonlinearity,
    DissipationClass, NonlinearitySpec,
};
use crate::solver::{simulate, simulate_ode, CutoffPhi, CutoffPsi, DiffusionVector, SimConfig};

use super::criteria::{ok_flag, sup_field_diff};
use super::scenario::random_fields;
use super::HarnessError;

fn random_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Reflecting walls make the discrete divergence theorem exact: the
/// laplacian sums to zero, and its quadratic form equals the face-sum
/// gradient energy.
pub fn laplacian_identities() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut instances = Vec::new();
    for (label, grid) in [
        ("line", SpatialGrid::new(vec![1.7], vec![33])?),
        ("plane", SpatialGrid::new(vec![1.0, 0.8], vec![12, 9])?),
    ] {
        let n = grid.node_count();
        let w = grid.cell_volume();
        let mut worst_sum = 0.0f64;
        let mut worst_energy = 0.0f64;
        for _ in 0..20 {
            let u = random_vector(&mut rng, n, -2.0, 2.0);
            let mut lap = vec![0.0; n];
            grid.laplacian(&u, &mut lap);
            worst_sum = worst_sum.max(lap.iter().sum::<f64>().abs() * w);
            let quadratic: f64 = -w * u.iter().zip(&lap).map(|(&a, &b)| a * b).sum::<f64>();
            let energy = grid.gradient_energy(&u);
            worst_energy = worst_energy.max((quadratic - energy).abs() / energy.max(1.0));
        }
        instances.push(CheckInstance::bounded(
            format!("{label}: laplacian integrates to zero"),
            worst_sum,
            1e-10,
        ));
        instances.push(CheckInstance::bounded(
            format!("{label}: summation by parts matches the face energy"),
            worst_energy,
            1e-12,
        ));
    }
    Ok(instances)
}

/// Half-shifted cosines are exact eigenvectors of the discrete operator,
/// boundary rows included.
pub fn cosine_eigenmodes() -> Result<Vec<CheckInstance>, HarnessError> {
    let length = 1.5;
    let n = 64;
    let grid = SpatialGrid::line(length, n)?;
    let h = grid.spacing(0);
    let mut instances = Vec::new();
    for k in [1usize, 3, 7] {
        let freq = k as f64 * std::f64::consts::PI / length;
        let mode: Vec<f64> = (0..n)
            .map(|j| (freq * (j as f64 + 0.5) * h).cos())
            .collect();
        let lambda = (2.0 / (h * h)) * (1.0 - (freq * h).cos());
        let mut lap = vec![0.0; n];
        grid.laplacian(&mode, &mut lap);
        let residual = lap
            .iter()
            .zip(&mode)
            .map(|(&l, &v)| (l + lambda * v).abs())
            .fold(0.0f64, f64::max);
        instances.push(CheckInstance::bounded(
            format!("mode {k} eigen-residual"),
            residual,
            1e-10 * lambda,
        ));
    }
    Ok(instances)
}

/// One implicit diffusion step is an averaging map: it conserves the node
/// sum, respects the data's range, and contracts every p-norm.
pub fn heat_step_bounds() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut instances = Vec::new();
    for (label, grid) in [
        ("line", SpatialGrid::new(vec![1.0], vec![40])?),
        ("plane", SpatialGrid::new(vec![0.9, 1.3], vec![12, 10])?),
    ] {
        let n = grid.node_count();
        let mut range_excess = 0.0f64;
        let mut mass_drift = 0.0f64;
        let mut norm_growth = 0.0f64;
        for _ in 0..15 {
            let u = random_vector(&mut rng, n, -1.0, 2.0);
            let d = rng.random_range(0.1..4.0);
            let dt = rng.random_range(1e-4..0.2);
            let w = grid.heat_solve_implicit(&u, d, dt)?;
            let (lo, hi) = u
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            for &x in &w {
                range_excess = range_excess.max((lo - x).max(x - hi));
            }
            let drift =
                (w.iter().sum::<f64>() - u.iter().sum::<f64>()).abs() / u.len() as f64;
            mass_drift = mass_drift.max(drift);
            for p in [1.0, 2.0, f64::INFINITY] {
                let growth = grid.lp_norm(&w, p) - grid.lp_norm(&u, p);
                norm_growth = norm_growth.max(growth);
            }
        }
        instances.push(CheckInstance::bounded(
            format!("{label}: solution stays inside the data's range"),
            range_excess,
            1e-10,
        ));
        instances.push(CheckInstance::bounded(
            format!("{label}: node sum is conserved"),
            mass_drift,
            1e-11,
        ));
        instances.push(CheckInstance::bounded(
            format!("{label}: no p-norm ever grows"),
            norm_growth,
            1e-10,
        ));
    }
    Ok(instances)
}

/// Sampled sharp inequality: gradient energy dominates the spectral gap
/// times the squared deviation from the average.
pub fn poincare_inequality() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut instances = Vec::new();
    for (label, grid) in [
        ("line", SpatialGrid::new(vec![2.0], vec![48])?),
        ("plane", SpatialGrid::new(vec![1.0, 1.4], vec![14, 11])?),
    ] {
        let n = grid.node_count();
        let c_omega = grid.poincare_constant();
        let mut worst = f64::INFINITY;
        for _ in 0..50 {
            let mut u = random_vector(&mut rng, n, -1.0, 1.0);
            let avg = grid.spatial_average(&u);
            for x in u.iter_mut() {
                *x -= avg;
            }
            let dev = grid.lp_norm(&u, 2.0);
            if dev < 1e-12 {
                continue;
            }
            worst = worst.min(grid.gradient_energy(&u) / (c_omega * dev * dev));
        }
        instances.push(CheckInstance::bounded(
            format!("{label}: worst energy-to-gap ratio stays at or above one"),
            1.0 - 1e-9,
            worst,
        ));
    }
    Ok(instances)
}

/// Quadrature conventions pinned by hand values: cell-weighted norms, the
/// arithmetic-mean average (exact on affine data), and the sup norm.
pub fn quadrature_values() -> Result<Vec<CheckInstance>, HarnessError> {
    let grid = SpatialGrid::line(1.0, 2)?;
    let u = [3.0, -4.0];
    let l1 = grid.lp_norm(&u, 1.0);
    let l2 = grid.lp_norm(&u, 2.0);
    let linf = grid.lp_norm(&u, f64::INFINITY);
    let avg = grid.spatial_average(&u);

    let fine = SpatialGrid::line(1.0, 16)?;
    let affine: Vec<f64> = (0..16)
        .map(|j| 2.0 + 3.0 * fine.node_position(j)[0])
        .collect();
    let affine_avg_err = (fine.spatial_average(&affine) - 3.5).abs();

    Ok(vec![
        CheckInstance::bounded("two-cell 1-norm is 3.5", (l1 - 3.5).abs(), 1e-14),
        CheckInstance::bounded("two-cell 2-norm is sqrt(12.5)", (l2 - 12.5f64.sqrt()).abs(), 1e-14),
        CheckInstance::bounded("two-cell sup norm is 4", (linf - 4.0).abs(), 0.0),
        CheckInstance::bounded("two-cell average is -0.5", (avg + 0.5).abs(), 1e-14),
        CheckInstance::bounded(
            "average of 2 + 3x over the unit box is exactly 3.5",
            affine_avg_err,
            1e-14,
        ),
    ])
}

/// The entropy density is nonnegative, vanishes only on the diagonal, and
/// its integrals match hand values.
pub fn entropy_pointwise() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut min_value = f64::INFINITY;
    for _ in 0..500 {
        let x = rng.random_range(0.0..5.0);
        let y = rng.random_range(1e-3..5.0);
        min_value = min_value.min(relative_entropy_vector(&[x], &[y]));
    }
    let diag = relative_entropy_vector(&[1.7], &[1.7]);
    let hand = relative_entropy_vector(&[2.0], &[1.0]);
    let grid = SpatialGrid::line(1.0, 2)?;
    let field_hand = relative_entropy_field(&grid, &[vec![2.0, 1.0]], &[1.0]);
    let expected = 0.5 * (2.0 * 2.0f64.ln() - 1.0);
    Ok(vec![
        CheckInstance::bounded("density is never negative", -min_value, 0.0),
        CheckInstance::bounded("density vanishes on the diagonal", diag.abs(), 1e-14),
        CheckInstance::bounded(
            "vector hand value 2 ln 2 - 1",
            (hand - (2.0 * 2.0f64.ln() - 1.0)).abs(),
            1e-14,
        ),
        CheckInstance::bounded(
            "field integral hand value",
            (field_hand - expected).abs(),
            1e-14,
        ),
    ])
}

/// Monomial and classification conventions: zero to the zeroth power is
/// one, fractional powers clamp at zero, and the growth exponent and mass
/// classes of three stock networks.
pub fn monomial_conventions() -> Result<Vec<CheckInstance>, HarnessError> {
    let binding = parse_network("A + B -> C @ 1.0")?;
    let swap = parse_network("A <-> B @ 1.0, 1.0")?;
    let doubler = parse_network("A -> 2 A @ 1.0")?;
    Ok(vec![
        CheckInstance::bounded(
            "zero to the zeroth power is one",
            (monomial(&[0.0, 5.0], &[0.0, 2.0]) - 25.0).abs(),
            0.0,
        ),
        CheckInstance::bounded(
            "fractional power of four is two",
            (monomial(&[4.0], &[0.5]) - 2.0).abs(),
            1e-14,
        ),
        CheckInstance::bounded(
            "fractional powers clamp tiny negatives to zero",
            monomial(&[-1e-30], &[0.5]).abs(),
            0.0,
        ),
        ok_flag(
            "binding reaction loses mass",
            binding.dissipation_class() == DissipationClass::Dissipative,
        ),
        ok_flag(
            "interconversion conserves mass",
            swap.dissipation_class() == DissipationClass::Conservative,
        ),
        ok_flag(
            "doubling reaction creates mass",
            doubler.dissipation_class() == DissipationClass::Indefinite,
        ),
        CheckInstance::bounded(
            "binding reaction grows quadratically",
            (binding.growth_exponent() - 2.0).abs(),
            0.0,
        ),
        CheckInstance::bounded(
            "interconversion grows linearly",
            (swap.growth_exponent() - 1.0).abs(),
            0.0,
        ),
    ])
}

/// Conserved combinations annihilate the reaction term at every sampled
/// state.
pub fn conservation_annihilation() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut instances = Vec::new();
    for (label, text) in [
        ("autocatalytic pair", "A + B <-> 2 B @ 1.0, 2.0"),
        ("cycle", "A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0"),
    ] {
        let net = parse_network(text)?;
        let laws = net.conservation_laws();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let u = random_vector(&mut rng, net.species_count(), 0.0, 3.0);
            let f = net.evaluate_f(&u)?;
            for law in &laws {
                let dot: f64 = law.iter().zip(&f).map(|(&a, &b)| a * b).sum();
                worst = worst.max(dot.abs());
            }
        }
        instances.push(ok_flag(
            &format!("{label}: at least one conserved combination"),
            !laws.is_empty(),
        ));
        instances.push(CheckInstance::bounded(
            format!("{label}: conserved combinations annihilate the flow"),
            worst,
            1e-10,
        ));
    }
    Ok(instances)
}

/// Complex-balance residuals come out zero exactly at balanced states and
/// visibly nonzero away from them.
pub fn complex_balance_orientation() -> Result<Vec<CheckInstance>, HarnessError> {
    let swap = parse_network("A <-> B @ 1.0, 2.0")?;
    // balanced when 1*a = 2*b
    let balanced = swap.check_complex_balance(&[2.0, 1.0])?;
    let skewed = swap.check_complex_balance(&[1.0, 1.0])?;
    let cycle = parse_network("A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0")?;
    let cycle_balanced = cycle.check_complex_balance(&[1.0, 1.0, 1.0])?;
    let worst_balanced = balanced
        .residuals
        .iter()
        .fold(0.0f64, |a, &r| a.max(r.abs()));
    let worst_cycle = cycle_balanced
        .residuals
        .iter()
        .fold(0.0f64, |a, &r| a.max(r.abs()));
    let best_skewed = skewed
        .residuals
        .iter()
        .fold(0.0f64, |a, &r| a.max(r.abs()));
    Ok(vec![
        ok_flag("pair balances at (2,1)", balanced.balanced),
        CheckInstance::bounded("pair residuals vanish at (2,1)", worst_balanced, 1e-12),
        ok_flag("pair is out of balance at (1,1)", !skewed.balanced),
        CheckInstance::strict("imbalance at (1,1) is visible", 0.1, best_skewed),
        ok_flag("unit cycle balances", cycle_balanced.balanced),
        CheckInstance::bounded("cycle residuals vanish at the unit state", worst_cycle, 1e-12),
    ])
}

/// Mass-action systems never pull a vanished species negative; a built-in
/// nonlinearity with a constant sink is caught with a witness state.
pub fn quasi_positivity_sampled() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut instances = Vec::new();
    for (label, text) in [
        ("autocatalytic pair", "A + B <-> 2 B @ 1.0, 2.0"),
        ("cycle", "A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0"),
    ] {
        let spec = NonlinearitySpec::MassAction(parse_network(text)?);
        let report = check_quasi_positivity(&spec, 300, 3);
        instances.push(ok_flag(&format!("{label}: boundary flow points inward"), report.passed));
    }
    let builtin = NonlinearitySpec::Builtin(builtin_nonlinearity("remark-1-4")?);
    let report = check_quasi_positivity(&builtin, 300, 3);
    instances.push(ok_flag(
        "stock built-in nonlinearity: boundary flow points inward",
        report.passed,
    ));
    let sink = NonlinearitySpec::Builtin(BuiltinNonlinearity::new(
        "constant-sink",
        &["a", "b"],
        |_, out| {
            out[0] = -1.0;
            out[1] = 0.0;
        },
    ));
    let caught = check_quasi_positivity(&sink, 300, 3);
    instances.push(ok_flag(
        "constant sink is rejected with a witness state",
        !caught.passed && caught.witness.is_some(),
    ));
    Ok(instances)
}

/// Cutoff plateau values and slope caps: the time gate is 0 before its
/// opening and 1 after, the radial cutoff is 1 inside and 0 outside, and
/// neither is ever steeper than 1.5 over its unit of transition.
pub fn cutoff_plateaus() -> Result<Vec<CheckInstance>, HarnessError> {
    let psi = CutoffPsi::new(2.0);
    let phi = CutoffPhi::new(2.0)?;
    let mut psi_slope = 0.0f64;
    let mut phi_slope = 0.0f64;
    let step = 1e-4;
    let mut t = 1.5;
    while t < 3.5 {
        psi_slope = psi_slope.max((psi.eval(t + step) - psi.eval(t)).abs() / step);
        t += 0.001;
    }
    let mut r = 0.0;
    while r < 4.5 {
        phi_slope = phi_slope.max((phi.eval_norm(r + step) - phi.eval_norm(r)).abs() / step);
        r += 0.001;
    }
    Ok(vec![
        CheckInstance::bounded("time gate closed before its opening", psi.eval(2.0).abs(), 0.0),
        CheckInstance::bounded(
            "time gate half-open at the midpoint",
            (psi.eval(2.5) - 0.5).abs(),
            1e-14,
        ),
        CheckInstance::bounded("time gate fully open after one unit", (psi.eval(3.0) - 1.0).abs(), 0.0),
        CheckInstance::bounded("radial cutoff flat inside", (phi.eval_norm(1.9) - 1.0).abs(), 0.0),
        CheckInstance::bounded(
            "radial cutoff half-height at one and a half radii",
            (phi.eval_norm(3.0) - 0.5).abs(),
            1e-14,
        ),
        CheckInstance::bounded("radial cutoff vanishes past twice the radius", phi.eval_norm(4.1).abs(), 0.0),
        CheckInstance::bounded("time gate slope within 1.5", psi_slope, 1.5 + 1e-6),
        CheckInstance::bounded("radial slope within 1.5 over the radius", phi_slope, 0.75 + 1e-6),
    ])
}

/// The bisection solver for one reversible reaction and the damped Newton
/// solver agree to well under their verification tolerances.
pub fn equilibrium_solver_agreement() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut instances = Vec::new();
    for (label, text, u0) in [
        ("interconversion", "A <-> B @ 2.0, 1.0", vec![1.0, 2.0]),
        ("dimerization", "2 A <-> B @ 0.7, 1.3", vec![1.0, 0.75]),
    ] {
        let net = parse_network(text)?;
        let bisected = solve_single_reversible_equilibrium(&net, &u0)?;
        let newton = solve_complex_balanced_equilibrium(&net, &u0)?;
        let gap = bisected
            .u_inf
            .iter()
            .zip(&newton.u_inf)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        instances.push(CheckInstance::bounded(
            format!("{label}: the two solvers agree"),
            gap,
            1e-8,
        ));
    }
    Ok(instances)
}

/// Dividing the dynamics by the slowest diffusion coefficient and taking
/// proportionally larger steps reproduces the plain run state for state.
pub fn rescale_map_identity() -> Result<Vec<CheckInstance>, HarnessError> {
    let run = |rescale: bool| -> Result<FieldState, HarnessError> {
        let grid = SpatialGrid::line(1.0, 24)?;
        let net = parse_network("A <-> B @ 1.0, 1.0")?;
        let fields = random_fields(&grid, 2, 0.5, 1.5, 21);
        let (dt, t_end) = if rescale {
            // slowest coefficient is 2: double steps over doubled horizon
            (2e-3, 0.4)
        } else {
            (1e-3, 0.2)
        };
        let mut config = SimConfig::new(
            grid,
            NonlinearitySpec::MassAction(net),
            DiffusionVector::new(vec![2.0, 4.0])?,
            FieldState::new(fields),
            dt,
            t_end,
        );
        config.rescale_by_dmin = rescale;
        Ok(simulate(&config)?.final_state)
    };
    let plain = run(false)?;
    let rescaled = run(true)?;
    Ok(vec![CheckInstance::bounded(
        "rescaled run reproduces the plain run",
        sup_field_diff(&plain, &rescaled),
        1e-12,
    )])
}

/// The plain reaction integrator lands a cycle on its balanced state and
/// conserves the total exactly enough to matter.
pub fn ode_fixed_point() -> Result<Vec<CheckInstance>, HarnessError> {
    let net = parse_network("A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0")?;
    let spec = NonlinearitySpec::MassAction(net);
    let traj = simulate_ode(&spec, &[1.5, 0.9, 0.6], 1e-3, 40.0, 100)?;
    let last = traj.final_state();
    let dist = last.iter().map(|&x| (x - 1.0).abs()).fold(0.0f64, f64::max);
    let total_drift = (last.iter().sum::<f64>() - 3.0).abs();
    Ok(vec![
        CheckInstance::bounded("cycle lands on the unit state", dist, 1e-10),
        CheckInstance::bounded("total is conserved along the way", total_drift, 1e-12),
    ])
}

/// The closed-form constant really dominates the weighted product across a
/// grid of weights, amplitudes, and factors.
pub fn young_domination() -> Result<Vec<CheckInstance>, HarnessError> {
    let mut worst_excess = f64::NEG_INFINITY;
    for eps in [0.2, 0.4, 0.6, 0.8] {
        for amp in [0.5, 2.0] {
            let constant = young_bound(eps, amp)?;
            for x in [0.1, 0.7, 1.9, 4.0] {
                for y in [0.1, 0.7, 1.9, 4.0] {
                    let lhs = amp * x * y;
                    let rhs = eps * x.powf(1.0 / eps) + constant * y.powf(1.0 / (1.0 - eps));
                    worst_excess = worst_excess.max(lhs - rhs);
                }
            }
        }
    }
    Ok(vec![CheckInstance::bounded(
        "weighted product never exceeds its split bound",
        worst_excess,
        1e-12,
    )])
}

/// A planted exponential is recovered to near machine precision.
pub fn fit_recovery() -> Result<Vec<CheckInstance>, HarnessError> {
    let times: Vec<f64> = (0..=200).map(|k| 0.01 * k as f64).collect();
    let values: Vec<f64> = times.iter().map(|&t| 3.7 * (-2.2 * t).exp()).collect();
    let fit = fit_exponential(&times, &values, 0.0, 2.0)?;
    Ok(vec![
        CheckInstance::bounded("planted rate recovered", (fit.rate - 2.2).abs(), 1e-10),
        CheckInstance::bounded("planted amplitude recovered", (fit.amplitude - 3.7).abs(), 1e-9),
        CheckInstance::bounded("fit is exact up to roundoff", 1.0 - fit.r_squared, 1e-12),
    ])
}
