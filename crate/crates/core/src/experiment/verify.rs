//! Monte Carlo checks of the analytic envelopes.

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, PlanSpec};
use super::runner::{delta_stat, param_tuples, run_experiment, RunOutput};
use crate::analytics::{
    ball_tail_lower, ball_tail_upper, check_envelope, janson_diameter_bound, tau_cdf_bounds,
    EmpiricalCdf, DKW_CONFIDENCE,
};
use crate::error::{Error, Result};

/// One checked point: `lower - band <= empirical <= upper + band`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub param_tuple: String,
    pub quantity: String,
    /// Grid abscissa for CDF checks; radius or `c` for tail checks.
    pub x: f64,
    pub empirical: f64,
    pub lower: f64,
    pub upper: f64,
    pub band: f64,
    pub pass: bool,
}

impl BoundPoint {
    fn new(
        param_tuple: &str,
        quantity: String,
        x: f64,
        empirical: f64,
        lower: f64,
        upper: f64,
        band: f64,
    ) -> Self {
        let pass = empirical >= lower - band && empirical <= upper + band;
        BoundPoint {
            param_tuple: param_tuple.to_string(),
            quantity,
            x,
            empirical,
            lower,
            upper,
            band,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub experiment: ExperimentKind,
    pub points: Vec<BoundPoint>,
    pub pass: bool,
}

/// Bernoulli frequency and `3 * sqrt(p(1-p)/M)`.
fn frequency_with_band(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let p = values.iter().sum::<f64>() / m;
    (p, 3.0 * (p * (1.0 - p) / m).sqrt())
}

/// Runs `cfg` and checks its statistics against the matching bounds.
pub fn verify_bounds(cfg: &ExperimentConfig) -> Result<(RunOutput, BoundReport)> {
    let plan = cfg.plan()?;
    if !matches!(
        plan.kind,
        ExperimentKind::CdfSandwich | ExperimentKind::BallTails | ExperimentKind::Diameter
    ) {
        return Err(Error::Config(format!(
            "verify supports cdf-sandwich, ball-tails and diameter, not {}",
            plan.kind
        )));
    }
    let out = run_experiment(cfg)?;
    let report = check_output(&out)?;
    Ok((out, report))
}

/// Bound checks on an existing run.
pub fn check_output(out: &RunOutput) -> Result<BoundReport> {
    let plan = out.config.plan()?;
    let mut points = Vec::new();
    for tuple in param_tuples(&out.config, &plan) {
        let label = tuple.to_string();
        let n = tuple.n;
        match &plan.settings {
            PlanSpec::CdfSandwich { .. } => {
                let k = tuple.k.expect("cdf-sandwich tuples carry k");
                let ecdf = EmpiricalCdf::new(out.values(&label, "tau"))?;
                let check = check_envelope(&ecdf, DKW_CONFIDENCE, |x| tau_cdf_bounds(n, k, x))?;
                for i in 0..check.grid.len() {
                    points.push(BoundPoint::new(
                        &label,
                        "tau_cdf".into(),
                        check.grid[i],
                        check.empirical[i],
                        check.lower[i],
                        check.upper[i],
                        check.band,
                    ));
                }
            }
            PlanSpec::BallTails { deltas, c } => {
                for &delta in deltas {
                    let (p, band) = frequency_with_band(
                        &out.values(&label, &delta_stat("lower_violation", delta)),
                    );
                    let bound = ball_tail_lower(n, delta)?.1;
                    points.push(BoundPoint::new(
                        &label,
                        "lower_tail".into(),
                        delta,
                        p,
                        0.0,
                        bound,
                        band,
                    ));
                    let (p, band) = frequency_with_band(
                        &out.values(&label, &delta_stat("upper_violation", delta)),
                    );
                    let bound = ball_tail_upper(n, delta, *c)?.value;
                    points.push(BoundPoint::new(
                        &label,
                        "upper_tail".into(),
                        delta,
                        p,
                        0.0,
                        bound,
                        band,
                    ));
                }
            }
            PlanSpec::Diameter { c, slack } => {
                let values = out.values(&label, "exceeds");
                let p = values.iter().sum::<f64>() / values.len() as f64;
                let bound = slack * janson_diameter_bound(n, *c)?.value;
                points.push(BoundPoint::new(
                    &label,
                    "diameter_tail".into(),
                    *c,
                    p,
                    0.0,
                    bound,
                    0.0,
                ));
            }
            _ => unreachable!("checked by verify_bounds"),
        }
    }
    let pass = points.iter().all(|p| p.pass);
    Ok(BoundReport {
        experiment: plan.kind,
        points,
        pass,
    })
}
