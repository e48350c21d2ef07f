//! Diffusion sweeps over a base scenario.
//!
//! Each row multiplies every diffusion coefficient by one factor, reruns
//! the scenario, and fits an exponential to the collapse of the deviation
//! from the spatial averages. Rows that blow up or whose fit degenerates
//! are recorded, not fatal: the sweep's job is to show the trend.

use std::fmt::Write as _;

use serde_json::json;

use crate::analysis::fit_exponential;
use crate::solver::{simulate, DiffusionVector};

use super::scenario::Scenario;
use super::HarnessError;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub factor: f64,
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub blew_up: bool,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub scenario: String,
    pub window: (f64, f64),
    pub rows: Vec<SweepRow>,
    /// Fitted rates never fall as the factor grows (ignoring rows without
    /// a fit).
    pub rates_nondecreasing: bool,
}

pub fn run_sweep(
    scenario: &Scenario,
    factors: &[f64],
    window: Option<(f64, f64)>,
) -> Result<SweepReport, HarnessError> {
    if factors.is_empty() {
        return Err(HarnessError::Invalid("sweep needs at least one factor".into()));
    }
    for &f in factors {
        if !(f > 0.0) || !f.is_finite() {
            return Err(HarnessError::Invalid(format!(
                "sweep factor {f} is not positive and finite"
            )));
        }
    }
    let base = scenario.build()?;
    let (t_lo, t_hi) = window.unwrap_or((0.1 * base.t_end, 0.9 * base.t_end));

    let mut rows = Vec::with_capacity(factors.len());
    for &factor in factors {
        let mut config = base.clone();
        let coeffs: Vec<f64> = config.diffusion.coeffs().iter().map(|d| d * factor).collect();
        config.diffusion = DiffusionVector::new(coeffs)?;
        let trajectory = simulate(&config)?;
        if trajectory.blew_up {
            rows.push(SweepRow {
                factor,
                rate: None,
                r_squared: None,
                blew_up: true,
            });
            continue;
        }
        let deviation: Vec<f64> = trajectory
            .records
            .iter()
            .map(|r| r.dev_l2.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        match fit_exponential(&trajectory.times, &deviation, t_lo, t_hi) {
            Ok(fit) => rows.push(SweepRow {
                factor,
                rate: Some(fit.rate),
                r_squared: Some(fit.r_squared),
                blew_up: false,
            }),
            Err(_) => rows.push(SweepRow {
                factor,
                rate: None,
                r_squared: None,
                blew_up: false,
            }),
        }
    }

    let fitted: Vec<f64> = rows.iter().filter_map(|r| r.rate).collect();
    let rates_nondecreasing = fitted.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    Ok(SweepReport {
        scenario: scenario.name.clone(),
        window: (t_lo, t_hi),
        rows,
        rates_nondecreasing,
    })
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("factor,rate,r_squared,blew_up\n");
    for row in &report.rows {
        let _ = write!(out, "{},", row.factor);
        if let Some(rate) = row.rate {
            let _ = write!(out, "{rate}");
        }
        out.push(',');
        if let Some(r2) = row.r_squared {
            let _ = write!(out, "{r2}");
        }
        let _ = writeln!(out, ",{}", row.blew_up);
    }
    out
}

pub fn sweep_json(report: &SweepReport) -> serde_json::Value {
    json!({
        "scenario": report.scenario,
        "window": [report.window.0, report.window.1],
        "rates_nondecreasing": report.rates_nondecreasing,
        "rows": report.rows.iter().map(|r| json!({
            "factor": r.factor,
            "rate": r.rate,
            "r_squared": r.r_squared,
            "blew_up": r.blew_up,
        })).collect::<Vec<_>>(),
    })
}
