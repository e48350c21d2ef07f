//! Equilibrium states of mass-action networks and the relative-entropy
//! functionals that certify convergence toward them.
//!
//! Two solvers cover the shipped scenarios. For a single reversible
//! reaction the equilibrium inside a conservation class reduces to a scalar
//! root-find along the reaction direction, done here by bisection on a
//! strictly decreasing log-flow gap, and the finite endpoints of that line
//! segment are the candidate boundary states. For complex-balanced networks
//! the equilibrium is the entropy minimizer over the class, computed by a
//! damped Newton iteration that stays in the positive orthant.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::grid::SpatialGrid;
use crate::network::{monomial, NetworkError, Reaction, ReactionNetwork};

#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumError {
    DimensionMismatch { expected: usize, got: usize },
    NegativeClassComponent(f64),
    NotSingleReversible,
    DegenerateClass,
    NoSignChange,
    NoReferenceState,
    NewtonStall { iterations: usize, gradient: f64 },
    VerificationFailed { residual: f64 },
    Network(NetworkError),
}

impl fmt::Display for EquilibriumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumError::DimensionMismatch { expected, got } => {
                write!(f, "class vector has {got} entries, network has {expected} species")
            }
            EquilibriumError::NegativeClassComponent(x) => {
                write!(f, "class vector component {x} is negative")
            }
            EquilibriumError::NotSingleReversible => {
                write!(f, "network is not a single reversible reaction pair")
            }
            EquilibriumError::DegenerateClass => {
                write!(f, "conservation class has no interior along the reaction direction")
            }
            EquilibriumError::NoSignChange => {
                write!(f, "no sign change found when bracketing the equilibrium")
            }
            EquilibriumError::NoReferenceState => {
                write!(f, "no complex-balanced reference state found")
            }
            EquilibriumError::NewtonStall { iterations, gradient } => write!(
                f,
                "entropy minimization stalled after {iterations} iterations (gradient {gradient:e})"
            ),
            EquilibriumError::VerificationFailed { residual } => {
                write!(f, "candidate equilibrium failed verification (residual {residual:e})")
            }
            EquilibriumError::Network(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EquilibriumError {}

impl From<NetworkError> for EquilibriumError {
    fn from(e: NetworkError) -> Self {
        EquilibriumError::Network(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// All components strictly positive.
    Positive,
    /// At least one component exactly zero with all reaction flows vanishing.
    Boundary,
}

/// An equilibrium state together with the conserved masses of the class it
/// was solved in (one entry per conservation law, in the network's order).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub u_inf: Vec<f64>,
    pub masses: Vec<f64>,
    pub kind: EquilibriumKind,
}

/// `phi(x, y) = x ln(x/y) - x + y`, extended by continuity to
/// `phi(0, y) = y`. Nonnegative, zero exactly at `x = y`.
fn entropy_density(x: f64, y: f64) -> f64 {
    debug_assert!(y > 0.0);
    let x = x.max(0.0);
    if x == 0.0 {
        y
    } else {
        x * (x / y).ln() - x + y
    }
}

/// Relative entropy `sum_i phi(u_i, y_i)` of a concentration vector against
/// a positive reference.
pub fn relative_entropy_vector(u: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), y.len());
    u.iter().zip(y).map(|(&x, &r)| entropy_density(x, r)).sum()
}

/// Relative entropy of a field against a constant reference vector,
/// integrated with the grid's cell quadrature.
pub fn relative_entropy_field(grid: &SpatialGrid, fields: &[Vec<f64>], y: &[f64]) -> f64 {
    debug_assert_eq!(fields.len(), y.len());
    let w = grid.cell_volume();
    let mut total = 0.0;
    for (field, &r) in fields.iter().zip(y) {
        for &x in field {
            total += entropy_density(x, r);
        }
    }
    total * w
}

fn validate_class(net: &ReactionNetwork, u0: &[f64]) -> Result<(), EquilibriumError> {
    if u0.len() != net.species_count() {
        return Err(EquilibriumError::DimensionMismatch {
            expected: net.species_count(),
            got: u0.len(),
        });
    }
    for &x in u0 {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(EquilibriumError::NegativeClassComponent(x));
        }
    }
    Ok(())
}

fn conserved_masses(net: &ReactionNetwork, u0: &[f64]) -> Vec<f64> {
    net.conservation_laws()
        .iter()
        .map(|w| w.iter().zip(u0).map(|(a, b)| a * b).sum())
        .collect()
}

/// The forward reaction of a two-reaction reversible pair, or None.
fn reversible_pair(net: &ReactionNetwork) -> Option<(&Reaction, &Reaction)> {
    let rs = net.reactions();
    if rs.len() == 2 && rs[0].reactants == rs[1].products && rs[0].products == rs[1].reactants {
        Some((&rs[0], &rs[1]))
    } else {
        None
    }
}

/// Feasible parameter interval for `u0 + s v >= 0`; either end may be
/// infinite when `v` never pushes that side negative.
fn feasible_interval(u0: &[f64], v: &[f64]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&x, &dv) in u0.iter().zip(v) {
        if dv > 0.0 {
            lo = lo.max(-x / dv);
        } else if dv < 0.0 {
            hi = hi.min(x / -dv);
        }
    }
    (lo, hi)
}

/// Solve the in-class equilibrium of a single reversible reaction.
///
/// Along `u(s) = u0 + s (beta - alpha)` the log gap between forward and
/// backward flows, `g(s) = ln k_f - ln k_b + sum_i (alpha_i - beta_i) ln
/// u_i(s)`, is strictly decreasing, diverges to `+inf`/`-inf` at the finite
/// endpoints of the feasible interval, and has the unique positive
/// equilibrium as its root. Bisection after geometric bracketing.
pub fn solve_single_reversible_equilibrium(
    net: &ReactionNetwork,
    u0: &[f64],
) -> Result<EquilibriumSolution, EquilibriumError> {
    validate_class(net, u0)?;
    let (fwd, bwd) = reversible_pair(net).ok_or(EquilibriumError::NotSingleReversible)?;
    let m = net.species_count();
    let v: Vec<f64> = (0..m).map(|i| fwd.products[i] - fwd.reactants[i]).collect();
    let (s_lo, s_hi) = feasible_interval(u0, &v);
    if !(s_hi - s_lo > 1e-300) {
        return Err(EquilibriumError::DegenerateClass);
    }

    let log_rate_gap = fwd.rate.ln() - bwd.rate.ln();
    let state = |s: f64| -> Vec<f64> { (0..m).map(|i| u0[i] + s * v[i]).collect() };
    let g = |s: f64| -> f64 {
        let u = state(s);
        let mut sum = log_rate_gap;
        for i in 0..m {
            let e = fwd.reactants[i] - fwd.products[i];
            if e != 0.0 {
                sum += e * u[i].max(1e-300).ln();
            }
        }
        sum
    };

    let c0 = match (s_lo.is_finite(), s_hi.is_finite()) {
        (true, true) => 0.5 * (s_lo + s_hi),
        (true, false) => s_lo + 1.0,
        (false, true) => s_hi - 1.0,
        (false, false) => unreachable!("nonzero direction always bounds one side"),
    };

    // walk toward an endpoint (or outward on an unbounded side) until the
    // log gap shows the sign that bisection needs there
    let bracket = |want_positive: bool| -> Result<f64, EquilibriumError> {
        let toward = if want_positive { s_lo } else { s_hi };
        let mut k = 0u32;
        loop {
            let s = if toward.is_finite() {
                toward + (c0 - toward) * 0.5f64.powi(k as i32)
            } else if want_positive {
                c0 - 2.0f64.powi(k as i32)
            } else {
                c0 + 2.0f64.powi(k as i32)
            };
            let gs = g(s);
            if (want_positive && gs > 0.0) || (!want_positive && gs < 0.0) {
                return Ok(s);
            }
            if gs == 0.0 {
                return Ok(s);
            }
            k += 1;
            if k > 200 {
                return Err(EquilibriumError::NoSignChange);
            }
        }
    };
    let mut a = bracket(true)?;
    let mut b = bracket(false)?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let s = 0.5 * (a + b);
    let u_inf: Vec<f64> = state(s).iter().map(|&x| x.max(0.0)).collect();
    Ok(EquilibriumSolution {
        masses: conserved_masses(net, u0),
        u_inf,
        kind: EquilibriumKind::Positive,
    })
}

/// Enumerate boundary equilibria of a single reversible reaction within the
/// class of `u0`: finite endpoints of the feasible segment where both the
/// forward and backward flows vanish exactly.
pub fn find_boundary_equilibria_single(
    net: &ReactionNetwork,
    u0: &[f64],
) -> Result<Vec<EquilibriumSolution>, EquilibriumError> {
    validate_class(net, u0)?;
    let (fwd, bwd) = reversible_pair(net).ok_or(EquilibriumError::NotSingleReversible)?;
    let m = net.species_count();
    let v: Vec<f64> = (0..m).map(|i| fwd.products[i] - fwd.reactants[i]).collect();
    let (s_lo, s_hi) = feasible_interval(u0, &v);
    let scale = u0.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let masses = conserved_masses(net, u0);

    let mut out = Vec::new();
    for s in [s_lo, s_hi] {
        if !s.is_finite() {
            continue;
        }
        // the binding components are exactly zero at the endpoint; snap the
        // roundoff so monomials vanish identically
        let u: Vec<f64> = (0..m)
            .map(|i| {
                let x = u0[i] + s * v[i];
                if x.abs() <= 1e-12 * scale {
                    0.0
                } else {
                    x.max(0.0)
                }
            })
            .collect();
        let flow_f = fwd.rate * monomial(&u, &fwd.reactants);
        let flow_b = bwd.rate * monomial(&u, &bwd.reactants);
        if flow_f == 0.0 && flow_b == 0.0 {
            out.push(EquilibriumSolution {
                u_inf: u,
                masses: masses.clone(),
                kind: EquilibriumKind::Boundary,
            });
        }
    }
    out.dedup_by(|a, b| a.u_inf == b.u_inf);
    Ok(out)
}

/// Orthonormal basis of the span of the reaction vectors, as columns.
fn stoichiometric_basis(net: &ReactionNetwork) -> DMatrix<f64> {
    let m = net.species_count();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for r in net.reactions() {
        let mut v = DVector::from_iterator(m, (0..m).map(|i| r.products[i] - r.reactants[i]));
        for c in &cols {
            let p = c.dot(&v);
            v -= c * p;
        }
        let n = v.norm();
        if n > 1e-10 {
            cols.push(v / n);
        }
    }
    let mut b = DMatrix::zeros(m, cols.len());
    for (j, c) in cols.iter().enumerate() {
        b.set_column(j, c);
    }
    b
}

/// Search for a spatially constant complex-balanced reference state.
///
/// Tries the uniform state at `t = 1`, then for a single reversible pair
/// the detailed-balance closed form `c = exp(lambda (alpha - beta))` with
/// `lambda = ln(k_b / k_f) / |alpha - beta|^2`, then a log-spaced scan of
/// uniform states.
fn reference_state(net: &ReactionNetwork) -> Result<Vec<f64>, EquilibriumError> {
    let m = net.species_count();
    let balanced = |c: &[f64]| -> bool {
        net.check_complex_balance(c).map(|r| r.balanced).unwrap_or(false)
    };

    let ones = vec![1.0; m];
    if balanced(&ones) {
        return Ok(ones);
    }
    if let Some((fwd, bwd)) = reversible_pair(net) {
        let diff: Vec<f64> = (0..m).map(|i| fwd.reactants[i] - fwd.products[i]).collect();
        let norm2: f64 = diff.iter().map(|x| x * x).sum();
        let lambda = (bwd.rate / fwd.rate).ln() / norm2;
        let c: Vec<f64> = diff.iter().map(|&x| (lambda * x).exp()).collect();
        if balanced(&c) {
            return Ok(c);
        }
    }
    for k in 0..=240 {
        let t = 10f64.powf(-6.0 + 12.0 * k as f64 / 240.0);
        let c = vec![t; m];
        if balanced(&c) {
            return Ok(c);
        }
    }
    Err(EquilibriumError::NoReferenceState)
}

/// Solve the complex-balanced equilibrium in the conservation class of
/// `u0` by minimizing relative entropy against a complex-balanced
/// reference state over `u0 + span(reaction vectors)`.
///
/// Damped Newton in the class coordinates: gradient `B^T ln(u/c)`, Hessian
/// `B^T diag(1/u) B`, with backtracking that keeps the iterate strictly
/// positive and enforces an Armijo decrease. The result is verified to
/// annihilate the reaction term and to balance every complex before it is
/// returned.
pub fn solve_complex_balanced_equilibrium(
    net: &ReactionNetwork,
    u0: &[f64],
) -> Result<EquilibriumSolution, EquilibriumError> {
    validate_class(net, u0)?;
    if u0.iter().any(|&x| x <= 0.0) {
        // the entropy gradient needs an interior starting point
        return Err(EquilibriumError::DegenerateClass);
    }
    let c = reference_state(net)?;
    let basis = stoichiometric_basis(net);
    let m = net.species_count();
    let q = basis.ncols();

    let mut u = DVector::from_column_slice(u0);
    let entropy = |u: &DVector<f64>| relative_entropy_vector(u.as_slice(), &c);
    let mut converged = false;
    let mut last_grad = f64::INFINITY;
    for _ in 0..200 {
        let log_ratio = DVector::from_iterator(m, (0..m).map(|i| (u[i] / c[i]).ln()));
        let grad = basis.transpose() * &log_ratio;
        last_grad = grad.amax();
        if last_grad <= 1e-13 {
            converged = true;
            break;
        }
        let mut hess = DMatrix::zeros(q, q);
        for a in 0..q {
            for b in 0..q {
                let mut s = 0.0;
                for i in 0..m {
                    s += basis[(i, a)] * basis[(i, b)] / u[i];
                }
                hess[(a, b)] = s;
            }
        }
        let dy = match hess.clone().cholesky() {
            Some(ch) => -(ch.solve(&grad)),
            None => match hess.lu().solve(&grad) {
                Some(x) => -x,
                None => {
                    return Err(EquilibriumError::NewtonStall {
                        iterations: 0,
                        gradient: last_grad,
                    })
                }
            },
        };
        let du = &basis * &dy;
        let slope = grad.dot(&dy);
        let h0 = entropy(&u);
        // slack of a few ulps keeps roundoff in the entropy sum from
        // rejecting genuine descent steps near the minimizer
        let noise = 8.0 * f64::EPSILON * h0.abs().max(1.0);
        let mut tau = 1.0;
        let mut stepped = false;
        for _ in 0..60 {
            let cand = &u + &du * tau;
            if cand.iter().all(|&x| x > 0.0) && entropy(&cand) <= h0 + 1e-4 * tau * slope + noise {
                u = cand;
                stepped = true;
                break;
            }
            tau *= 0.5;
        }
        if !stepped {
            return Err(EquilibriumError::NewtonStall {
                iterations: 200,
                gradient: last_grad,
            });
        }
    }
    if !converged {
        return Err(EquilibriumError::NewtonStall {
            iterations: 200,
            gradient: last_grad,
        });
    }

    let u_inf: Vec<f64> = u.iter().copied().collect();
    let f = net.evaluate_f(&u_inf)?;
    let max_flow = net
        .reactions()
        .iter()
        .map(|r| r.rate * monomial(&u_inf, &r.reactants))
        .fold(0.0f64, f64::max);
    let residual = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if residual > 1e-10 * (1.0 + max_flow) {
        return Err(EquilibriumError::VerificationFailed { residual });
    }
    let report = net.check_complex_balance(&u_inf)?;
    let worst = report.residuals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if worst > 1e-10 * report.scale.max(1.0) {
        return Err(EquilibriumError::VerificationFailed { residual: worst });
    }
    Ok(EquilibriumSolution {
        masses: conserved_masses(net, u0),
        u_inf,
        kind: EquilibriumKind::Positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;
    use proptest::prelude::*;

    fn net(src: &str) -> ReactionNetwork {
        parse_network(src).expect("test network parses")
    }

    #[test]
    fn entropy_density_hand_values() {
        assert!((entropy_density(2.0, 1.0) - (2.0 * 2.0f64.ln() - 1.0)).abs() < 1e-15);
        assert_eq!(entropy_density(0.0, 1.0), 1.0);
        assert_eq!(entropy_density(1.0, 1.0), 0.0);
        assert_eq!(entropy_density(3.0, 3.0), 0.0);
    }

    #[test]
    fn entropy_vector_sums_components() {
        let v = relative_entropy_vector(&[2.0, 0.0], &[1.0, 1.0]);
        assert!((v - (2.0 * 2.0f64.ln() - 1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn entropy_field_two_node_quadrature() {
        let grid = SpatialGrid::line(1.0, 2).unwrap();
        let fields = vec![vec![1.0, 3.0]];
        let want = 0.5 * (3.0 * 3.0f64.ln() - 2.0);
        assert!((relative_entropy_field(&grid, &fields, &[1.0]) - want).abs() < 1e-14);
    }

    #[test]
    fn entropy_nonnegative_and_vanishes_only_at_reference() {
        for k in 0..2000 {
            let x = 0.01 * k as f64;
            let y = 0.5 + 0.002 * k as f64;
            let p = entropy_density(x, y);
            assert!(p >= -1e-15);
            if (x - y).abs() > 1e-3 {
                assert!(p > 0.0);
            }
        }
    }

    #[test]
    fn linear_exchange_equilibrates_to_shared_average() {
        let n = net("A <-> B @ 1.0, 1.0");
        let sol = solve_single_reversible_equilibrium(&n, &[3.0, 1.0]).unwrap();
        assert!((sol.u_inf[0] - 2.0).abs() < 1e-12);
        assert!((sol.u_inf[1] - 2.0).abs() < 1e-12);
        assert_eq!(sol.kind, EquilibriumKind::Positive);
        // one conservation law, mass 4 / sqrt(2)
        assert_eq!(sol.masses.len(), 1);
        assert!((sol.masses[0] - 4.0 / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn autocatalytic_pair_equilibrium() {
        let n = net("A + B <-> 2 B @ 1.0, 2.0");
        let sol = solve_single_reversible_equilibrium(&n, &[1.5, 1.5]).unwrap();
        assert!((sol.u_inf[0] - 2.0).abs() < 1e-12);
        assert!((sol.u_inf[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_interval_brackets_outward() {
        let n = net("A <-> 2 A @ 2.0, 1.0");
        let sol = solve_single_reversible_equilibrium(&n, &[0.5]).unwrap();
        assert!((sol.u_inf[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_class_is_degenerate() {
        let n = net("A <-> B @ 1.0, 1.0");
        let err = solve_single_reversible_equilibrium(&n, &[0.0, 0.0]).unwrap_err();
        assert_eq!(err, EquilibriumError::DegenerateClass);
    }

    #[test]
    fn non_reversible_networks_are_rejected() {
        let one_way = net("A -> B @ 1.0");
        assert_eq!(
            solve_single_reversible_equilibrium(&one_way, &[1.0, 1.0]).unwrap_err(),
            EquilibriumError::NotSingleReversible
        );
        let cycle = net("A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0");
        assert_eq!(
            solve_single_reversible_equilibrium(&cycle, &[1.0, 1.0, 1.0]).unwrap_err(),
            EquilibriumError::NotSingleReversible
        );
    }

    #[test]
    fn class_vector_validation() {
        let n = net("A <-> B @ 1.0, 1.0");
        assert!(matches!(
            solve_single_reversible_equilibrium(&n, &[1.0]).unwrap_err(),
            EquilibriumError::DimensionMismatch { expected: 2, got: 1 }
        ));
        assert!(matches!(
            solve_single_reversible_equilibrium(&n, &[1.0, -0.5]).unwrap_err(),
            EquilibriumError::NegativeClassComponent(_)
        ));
    }

    #[test]
    fn autocatalytic_boundary_state_found() {
        let n = net("A + B <-> 2 B @ 1.0, 2.0");
        let found = find_boundary_equilibria_single(&n, &[1.5, 1.5]).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].u_inf, vec![3.0, 0.0]);
        assert_eq!(found[0].kind, EquilibriumKind::Boundary);
    }

    #[test]
    fn linear_exchange_has_no_boundary_equilibria() {
        let n = net("A <-> B @ 1.0, 1.0");
        let found = find_boundary_equilibria_single(&n, &[1.0, 1.0]).unwrap();
        assert!(found.is_empty());
    }

    #[test]
    fn cycle_balances_at_uniform_state() {
        let n = net("A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0");
        let sol = solve_complex_balanced_equilibrium(&n, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(sol.u_inf, vec![1.0, 1.0, 1.0]);
        assert_eq!(sol.kind, EquilibriumKind::Positive);
    }

    #[test]
    fn cycle_equilibrium_from_skewed_class() {
        let n = net("A -> B @ 1.0\nB -> C @ 1.0\nC -> A @ 1.0");
        let sol = solve_complex_balanced_equilibrium(&n, &[2.0, 0.5, 0.5]).unwrap();
        for x in &sol.u_inf {
            assert!((x - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn newton_agrees_with_bisection_on_reversible_pairs() {
        for (src, u0) in [
            ("A <-> B @ 1.0, 1.0", vec![3.0, 1.0]),
            ("A + B <-> 2 B @ 1.0, 2.0", vec![1.5, 1.5]),
            ("2 A <-> B @ 0.7, 1.3", vec![1.0, 2.0]),
        ] {
            let n = net(src);
            let a = solve_single_reversible_equilibrium(&n, &u0).unwrap();
            let b = solve_complex_balanced_equilibrium(&n, &u0).unwrap();
            for i in 0..u0.len() {
                assert!(
                    (a.u_inf[i] - b.u_inf[i]).abs() <= 1e-8,
                    "{src}: component {i}: {} vs {}",
                    a.u_inf[i],
                    b.u_inf[i]
                );
            }
        }
    }

    #[test]
    fn equilibrium_satisfies_detailed_balance() {
        let n = net("A + B <-> 2 B @ 1.0, 2.0");
        let sol = solve_complex_balanced_equilibrium(&n, &[1.5, 1.5]).unwrap();
        let fwd = 1.0 * sol.u_inf[0] * sol.u_inf[1];
        let bwd = 2.0 * sol.u_inf[1] * sol.u_inf[1];
        assert!((fwd - bwd).abs() <= 1e-10 * fwd.max(1.0));
    }

    #[test]
    fn boundary_start_is_rejected_for_newton() {
        let n = net("A <-> B @ 1.0, 1.0");
        assert_eq!(
            solve_complex_balanced_equilibrium(&n, &[2.0, 0.0]).unwrap_err(),
            EquilibriumError::DegenerateClass
        );
    }

    #[test]
    fn unbalanceable_network_reports_no_reference() {
        // A -> B with no return path has no positive equilibrium at all
        let n = net("A -> B @ 1.0");
        assert_eq!(
            solve_complex_balanced_equilibrium(&n, &[1.0, 1.0]).unwrap_err(),
            EquilibriumError::NoReferenceState
        );
    }

    proptest! {
        #[test]
        fn reversible_pair_equilibria_balance_flows(
            af in 0usize..3, bf in 0usize..3, ab in 0usize..3, bb in 0usize..3,
            kf in 0.5f64..3.0, kb in 0.5f64..3.0,
            x0 in 0.5f64..4.0, y0 in 0.5f64..4.0,
        ) {
            // complexes (af A + bf B) <-> (ab A + bb B), skipping trivial pairs
            prop_assume!(af != ab || bf != bb);
            let fwd = Reaction {
                reactants: vec![af as f64, bf as f64],
                products: vec![ab as f64, bb as f64],
                rate: kf,
            };
            let bwd = Reaction {
                reactants: vec![ab as f64, bb as f64],
                products: vec![af as f64, bf as f64],
                rate: kb,
            };
            let n = ReactionNetwork::new(vec!["A".into(), "B".into()], vec![fwd, bwd]).unwrap();
            let u0 = [x0, y0];
            let sol = solve_single_reversible_equilibrium(&n, &u0).unwrap();
            let flow_f = kf * monomial(&sol.u_inf, &[af as f64, bf as f64]);
            let flow_b = kb * monomial(&sol.u_inf, &[ab as f64, bb as f64]);
            prop_assert!((flow_f - flow_b).abs() <= 1e-9 * flow_f.max(flow_b).max(1e-30));
            // conserved masses are preserved by the solution point
            for (w, m0) in n.conservation_laws().iter().zip(&sol.masses) {
                let m1: f64 = w.iter().zip(&sol.u_inf).map(|(a, b)| a * b).sum();
                prop_assert!((m1 - m0).abs() <= 1e-9 * m0.abs().max(1.0));
            }
        }
    }
}
