//! The quantitative machinery: integrability-exponent ladders, closed-form
//! constants, smallness conditions, exponential decay fits, and
//! uniform-in-time bound summaries extracted from trajectories.
//!
//! Everything here is plain arithmetic on numbers the other modules
//! produce; no randomness and no state, so every function is trivially
//! reproducible.

use std::fmt;

use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    BadDimension(usize),
    BadGrowthExponent(f64),
    BadEpsilon(f64),
    LadderStall { steps: usize },
    EmptyWindow { lo: f64, hi: f64 },
    InsufficientData { usable: usize, needed: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::BadDimension(n) => write!(f, "dimension {n} must be at least 1"),
            AnalysisError::BadGrowthExponent(mu) => {
                write!(f, "growth exponent {mu} must be finite and at least 1")
            }
            AnalysisError::BadEpsilon(e) => write!(f, "epsilon {e} outside (0, 1)"),
            AnalysisError::LadderStall { steps } => {
                write!(f, "exponent ladder failed to terminate within {steps} steps")
            }
            AnalysisError::EmptyWindow { lo, hi } => {
                write!(f, "time window [{lo}, {hi}] contains no samples")
            }
            AnalysisError::InsufficientData { usable, needed } => {
                write!(f, "only {usable} usable samples, need {needed}")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

/// The two exponent ladders of the iterative integrability bootstrap.
///
/// The first ladder climbs `q_k = ((n+2)/(n+1))^k` until it clears
/// `(mu - 1)(n + 2)/2`; the second starts from the top rung and follows
/// `p_{k+1} = (n+2)(p_k/mu) / (n+2 - 2 p_k/mu)` until `p/mu` exceeds
/// `(n+2)/2`, at which point one more parabolic estimate reaches the sup
/// norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSchedule {
    /// `q_0 .. q_K`, with `q_K` the first rung past the threshold.
    pub q: Vec<f64>,
    /// `p_0 = q_K` onward; the last entry is the first with
    /// `p/mu > (n+2)/2`.
    pub p: Vec<f64>,
    /// True when the p-ladder cleared its threshold (rather than stopping
    /// on a nonpositive denominator).
    pub p_reached_target: bool,
}

impl BootstrapSchedule {
    /// Number of rungs climbed by the q-ladder.
    pub fn k_steps(&self) -> usize {
        self.q.len() - 1
    }

    /// Number of rungs climbed by the p-ladder.
    pub fn k0_steps(&self) -> usize {
        self.p.len() - 1
    }
}

pub fn bootstrap_schedule(n: usize, mu: f64) -> Result<BootstrapSchedule, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::BadDimension(n));
    }
    if !(mu >= 1.0) || !mu.is_finite() {
        return Err(AnalysisError::BadGrowthExponent(mu));
    }
    let nf = n as f64;
    let ratio = (nf + 2.0) / (nf + 1.0);
    let q_threshold = (mu - 1.0) * (nf + 2.0) / 2.0;
    let mut q = vec![1.0];
    while *q.last().unwrap() <= q_threshold {
        let next = q.last().unwrap() * ratio;
        q.push(next);
        if q.len() > 10_000 {
            return Err(AnalysisError::LadderStall { steps: q.len() });
        }
    }

    let p_threshold = (nf + 2.0) / 2.0;
    let mut p = vec![*q.last().unwrap()];
    let mut reached = false;
    loop {
        let ratio_mu = p.last().unwrap() / mu;
        if ratio_mu > p_threshold {
            reached = true;
            break;
        }
        let denom = nf + 2.0 - 2.0 * ratio_mu;
        if denom <= 0.0 {
            break;
        }
        p.push((nf + 2.0) * ratio_mu / denom);
        if p.len() > 10_000 {
            return Err(AnalysisError::LadderStall { steps: p.len() });
        }
    }
    Ok(BootstrapSchedule {
        q,
        p,
        p_reached_target: reached,
    })
}

/// Rungs needed when only the diffusion gap is large: the smallest `K`
/// with `2 ((n+2)/n)^K > (n+2)/2`, returned with the ladder length
/// `L = K + 2`.
pub fn large_diffusion_k(n: usize) -> (usize, usize) {
    debug_assert!(n >= 1);
    let nf = n as f64;
    let ratio = (nf + 2.0) / nf;
    let threshold = (nf + 2.0) / 2.0;
    let mut k = 0usize;
    let mut value = 2.0;
    while value <= threshold {
        value *= ratio;
        k += 1;
    }
    (k, k + 2)
}

/// Product-splitting constant `2 (1 - eps) (2 eps)^{eps/(1-eps)}
/// A^{1/(1-eps)}`; dominates the sharp two-term splitting constant, so
/// `A x y <= eps x^{1/eps} + young_bound(eps, A) y^{1/(1-eps)}` for all
/// nonnegative `x`, `y`.
pub fn young_bound(epsilon: f64, amplitude: f64) -> Result<f64, AnalysisError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalysisError::BadEpsilon(epsilon));
    }
    let e = epsilon;
    Ok(2.0 * (1.0 - e) * (2.0 * e).powf(e / (1.0 - e)) * amplitude.powf(1.0 / (1.0 - e)))
}

/// Growth ceiling over a bootstrap window of `k + 1` unit time slabs:
/// `M e^{a l_r (k + 1)}`.
pub fn gronwall_ceiling(m_bound: f64, a: f64, l_r: f64, k: usize) -> f64 {
    m_bound * (a * l_r * (k as f64 + 1.0)).exp()
}

/// Ceiling on the averaged masses over the bootstrap window:
/// `max(c_embed 3^{1/(1-eps)} l_m^{1/(2(1-eps))}, e^{k+1} m_bound)`.
pub fn b_m_bound(
    c_embed: f64,
    l_m: f64,
    k: usize,
    m_bound: f64,
    epsilon: f64,
) -> Result<f64, AnalysisError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalysisError::BadEpsilon(epsilon));
    }
    let inv = 1.0 / (1.0 - epsilon);
    let first = c_embed * 3.0f64.powf(inv) * l_m.powf(0.5 * inv);
    let second = (k as f64 + 1.0).exp() * m_bound;
    Ok(first.max(second))
}

/// Spectral-gap margin `2 d_min c_omega - c_m` separating the slowest
/// diffusive decay from the reaction's Lipschitz feedback; positive means
/// deviations from the spatial average must collapse exponentially.
pub fn poincare_gap(d_min: f64, c_omega: f64, c_m: f64) -> f64 {
    2.0 * d_min * c_omega - c_m
}

/// One verified inequality instance, kept as raw numbers for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckInstance {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl CheckInstance {
    pub fn strict(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        CheckInstance {
            label: label.into(),
            lhs,
            rhs,
            holds: lhs < rhs,
        }
    }

    pub fn bounded(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        CheckInstance {
            label: label.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub instances: Vec<CheckInstance>,
    pub all_hold: bool,
}

impl ConditionReport {
    pub fn new(instances: Vec<CheckInstance>) -> Self {
        let all_hold = instances.iter().all(|i| i.holds);
        ConditionReport {
            instances,
            all_hold,
        }
    }
}

/// Smallness condition for the quasi-uniform diffusion regime: for every
/// ladder rung, half the diffusion spread times the regularity constant at
/// the midpoint diffusion (in the rung's dual exponent) must stay below 1.
/// `constants` pairs each dual exponent with its estimated constant.
pub fn quasi_uniform_condition(
    d_min: f64,
    d_max: f64,
    constants: &[(f64, f64)],
) -> ConditionReport {
    let spread = 0.5 * (d_max - d_min);
    let instances = constants
        .iter()
        .enumerate()
        .map(|(k, (q_dual, c_hat))| {
            CheckInstance::strict(
                format!("rung {} (dual exponent {:.6})", k + 1, q_dual),
                spread * c_hat,
                1.0,
            )
        })
        .collect();
    ConditionReport::new(instances)
}

/// Result of a least-squares exponential fit `y ~ amplitude e^{-rate t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

/// Fit `ln y` against `t` by least squares inside `[t_lo, t_hi]`.
///
/// Samples at or below the floor `1e-14` are dropped (they are roundoff
/// residue, not signal); at least 5 usable samples are required. A window
/// with zero log-variance fits exactly and reports `r_squared = 1`.
pub fn fit_exponential(
    times: &[f64],
    values: &[f64],
    t_lo: f64,
    t_hi: f64,
) -> Result<DecayFit, AnalysisError> {
    debug_assert_eq!(times.len(), values.len());
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    let mut in_window = 0usize;
    for (&t, &y) in times.iter().zip(values) {
        if t < t_lo || t > t_hi {
            continue;
        }
        in_window += 1;
        if y > 1e-14 {
            ts.push(t);
            logs.push(y.ln());
        }
    }
    if in_window == 0 {
        return Err(AnalysisError::EmptyWindow { lo: t_lo, hi: t_hi });
    }
    if ts.len() < 5 {
        return Err(AnalysisError::InsufficientData {
            usable: ts.len(),
            needed: 5,
        });
    }
    let n = ts.len() as f64;
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_l = logs.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&t, &l) in ts.iter().zip(&logs) {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (l - mean_l);
    }
    let slope = sxy / sxx;
    let intercept = mean_l - slope * mean_t;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&t, &l) in ts.iter().zip(&logs) {
        let pred = intercept + slope * t;
        ss_res += (l - pred) * (l - pred);
        ss_tot += (l - mean_l) * (l - mean_l);
    }
    let r_squared = if ss_tot <= 1e-30 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DecayFit {
        rate: -slope,
        amplitude: intercept.exp(),
        r_squared,
        samples: ts.len(),
        window: (t_lo, t_hi),
    })
}

/// Uniform-in-time summary of a trajectory: per-species running suprema
/// and a late-time growth indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBoundReport {
    /// `sup_t ||u_i(t)||_inf` over all samples.
    pub sup_linf: Vec<f64>,
    /// `sup_t ||u_i(t)||_1` over all samples.
    pub sup_l1: Vec<f64>,
    /// Sup norm over the last third of the run divided by the sup norm
    /// over the middle third; values near or below 1 indicate the bound
    /// has saturated rather than kept growing. `0/0` reads as 1.
    pub tail_ratio: Vec<f64>,
    pub blew_up: bool,
}

pub fn uniform_bound_report(traj: &Trajectory) -> UniformBoundReport {
    let m = traj
        .records
        .first()
        .map(|r| r.linf.len())
        .unwrap_or_default();
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    let mut sup_linf = vec![0.0f64; m];
    let mut sup_l1 = vec![0.0f64; m];
    let mut mid = vec![0.0f64; m];
    let mut last = vec![0.0f64; m];
    for rec in &traj.records {
        for i in 0..m {
            sup_linf[i] = sup_linf[i].max(rec.linf[i]);
            sup_l1[i] = sup_l1[i].max(rec.l1[i]);
            if rec.t >= t_end / 3.0 && rec.t < 2.0 * t_end / 3.0 {
                mid[i] = mid[i].max(rec.linf[i]);
            } else if rec.t >= 2.0 * t_end / 3.0 {
                last[i] = last[i].max(rec.linf[i]);
            }
        }
    }
    let tail_ratio = (0..m)
        .map(|i| {
            if mid[i] == 0.0 && last[i] == 0.0 {
                1.0
            } else {
                last[i] / mid[i]
            }
        })
        .collect();
    UniformBoundReport {
        sup_linf,
        sup_l1,
        tail_ratio,
        blew_up: traj.blew_up,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ladder_table_one_dimension_quadratic_growth() {
        let s = bootstrap_schedule(1, 2.0).unwrap();
        assert_eq!(s.q, vec![1.0, 1.5, 2.25]);
        assert_eq!(s.k_steps(), 2);
        assert_eq!(s.p, vec![2.25, 4.5]);
        assert_eq!(s.k0_steps(), 1);
        assert!(s.p_reached_target);
    }

    #[test]
    fn ladder_table_two_dimensions() {
        let s = bootstrap_schedule(2, 2.0).unwrap();
        assert_eq!(s.k_steps(), 3);
        let expect = [1.0, 4.0 / 3.0, 16.0 / 9.0, 64.0 / 27.0];
        for (a, b) in s.q.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_growth_needs_no_ladder() {
        let s = bootstrap_schedule(1, 1.0).unwrap();
        assert_eq!(s.q, vec![1.0]);
        assert_eq!(s.k_steps(), 0);
        assert!(s.p_reached_target);
    }

    #[test]
    fn ladder_rejects_bad_parameters() {
        assert!(bootstrap_schedule(0, 2.0).is_err());
        assert!(bootstrap_schedule(1, 0.5).is_err());
        assert!(bootstrap_schedule(1, f64::NAN).is_err());
    }

    #[test]
    fn large_diffusion_ladder_table() {
        assert_eq!(large_diffusion_k(1), (0, 2));
        assert_eq!(large_diffusion_k(2), (1, 3));
        assert_eq!(large_diffusion_k(4), (2, 4));
    }

    #[test]
    fn smaller_base_stays_under_doubled_larger_base() {
        for n in 1..=6u32 {
            for k in 0..=8u32 {
                let lhs = ((n + 1) as f64).powi(k as i32);
                let rhs = 2.0 * ((n + 2) as f64).powi(k as i32);
                assert!(lhs < rhs, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn young_bound_hand_value_and_validation() {
        assert!((young_bound(0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(young_bound(0.0, 1.0).is_err());
        assert!(young_bound(1.0, 1.0).is_err());
    }

    #[test]
    fn gronwall_ceiling_hand_value() {
        let c = gronwall_ceiling(2.0, 1.0, 0.5, 1);
        assert!((c - 2.0 * 1.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn mass_ceiling_hand_value() {
        let b = b_m_bound(1.0, 1.0, 0, 1.0, 0.5).unwrap();
        assert!((b - 9.0).abs() < 1e-12);
    }

    #[test]
    fn gap_formula() {
        let pi2 = std::f64::consts::PI.powi(2);
        let gap = poincare_gap(1.0, pi2, 2.0);
        assert!((gap - (2.0 * pi2 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn quasi_uniform_condition_flags_violations() {
        let ok = quasi_uniform_condition(1.0, 1.2, &[(2.0, 1.0), (3.0, 2.0)]);
        assert!(ok.all_hold);
        assert_eq!(ok.instances.len(), 2);
        assert!((ok.instances[1].lhs - 0.2).abs() < 1e-12);
        let bad = quasi_uniform_condition(1.0, 5.0, &[(2.0, 1.0)]);
        assert!(!bad.all_hold);
        assert!(bad.instances[0].lhs >= 1.0);
    }

    #[test]
    fn exponential_fit_recovers_planted_decay() {
        let times: Vec<f64> = (0..100).map(|k| 0.05 * k as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-2.0 * t).exp()).collect();
        let fit = fit_exponential(&times, &values, 0.5, 4.5).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-10);
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn exponential_fit_drops_floor_samples() {
        // decays through the floor: late samples must not poison the fit
        let times: Vec<f64> = (0..200).map(|k| 0.5 * k as f64).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| (1e-16f64).max((-1.0 * t).exp() * 1e-10))
            .collect();
        let fit = fit_exponential(&times, &values, 0.0, 100.0).unwrap();
        assert!(fit.samples < times.len());
        assert!((fit.rate - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exponential_fit_error_paths() {
        let times = [0.0, 1.0, 2.0, 3.0];
        let values = [1.0, 0.5, 0.25, 0.125];
        assert!(matches!(
            fit_exponential(&times, &values, 10.0, 20.0),
            Err(AnalysisError::EmptyWindow { .. })
        ));
        assert!(matches!(
            fit_exponential(&times, &values, 0.0, 3.0),
            Err(AnalysisError::InsufficientData { usable: 4, .. })
        ));
        let tiny = [1e-15, 1e-15, 1e-15, 1e-15, 1e-16, 1e-17];
        let ts = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            fit_exponential(&ts, &tiny, 0.0, 5.0),
            Err(AnalysisError::InsufficientData { usable: 0, .. })
        ));
    }

    #[test]
    fn constant_series_fits_with_unit_r_squared() {
        let times: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let values = vec![2.0; 10];
        let fit = fit_exponential(&times, &values, 0.0, 9.0).unwrap();
        assert!(fit.rate.abs() < 1e-14);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn bound_report_saturation_and_tail() {
        use crate::grid::{FieldState, SpatialGrid};
        use crate::network::{parse_network, NonlinearitySpec};
        use crate::solver::{simulate, DiffusionVector, SimConfig};
        let grid = SpatialGrid::line(1.0, 8).unwrap();
        let spec = NonlinearitySpec::MassAction(parse_network("A -> 0 @ 1.0").unwrap());
        let mut config = SimConfig::new(
            grid,
            spec,
            DiffusionVector::new(vec![1.0]).unwrap(),
            FieldState::new(vec![vec![1.0; 8]]),
            0.01,
            3.0,
        );
        config.sample_stride = 10;
        let traj = simulate(&config).unwrap();
        let report = uniform_bound_report(&traj);
        assert!(!report.blew_up);
        assert!((report.sup_linf[0] - 1.0).abs() < 1e-12);
        assert!((report.sup_l1[0] - 1.0).abs() < 1e-12);
        // decaying run: late suprema sit below the middle ones
        assert!(report.tail_ratio[0] < 1.0);
    }

    proptest! {
        #[test]
        fn product_split_dominates(
            eps in 0.05f64..0.95,
            a in 0.1f64..5.0,
            x in 0.0f64..10.0,
            y in 0.0f64..10.0,
        ) {
            let c = young_bound(eps, a).unwrap();
            let lhs = a * x * y;
            let rhs = eps * x.powf(1.0 / eps) + c * y.powf(1.0 / (1.0 - eps));
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn ladders_terminate_and_clear_thresholds(n in 1usize..4, mu in 1.0f64..4.0) {
            let s = bootstrap_schedule(n, mu).unwrap();
            let nf = n as f64;
            let q_thr = (mu - 1.0) * (nf + 2.0) / 2.0;
            prop_assert!(*s.q.last().unwrap() > q_thr);
            for w in s.q.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            if s.p_reached_target {
                prop_assert!(s.p.last().unwrap() / mu > (nf + 2.0) / 2.0);
            }
        }
    }
}
