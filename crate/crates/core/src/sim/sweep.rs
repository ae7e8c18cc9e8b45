use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, ControllerKind, ManeuverMetrics, PolicySet, Scenario};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub format: String,
    pub scenario: String,
    pub fingerprint: String,
    pub dp: ManeuverMetrics,
    pub baseline: ManeuverMetrics,
    /// Baseline impulse over DP impulse.
    pub impulse_ratio: f64,
    /// Baseline max settling over DP max settling.
    pub settling_ratio: f64,
    pub surrogate_baseline: bool,
}

fn with_controller(s: &Scenario, c: ControllerKind) -> Scenario {
    let mut s = s.clone();
    s.controller = c;
    s
}

/// Runs the DP and baseline controllers on the same scenario.
pub fn compare(scenario: &Scenario, policies: &PolicySet) -> Result<CompareReport> {
    let (dp, bl) = rayon::join(
        || run(&with_controller(scenario, ControllerKind::Dp), Some(policies)),
        || run(&with_controller(scenario, ControllerKind::Baseline), None),
    );
    let (dp, bl) = (dp?.metrics, bl?.metrics);
    let fingerprint = crate::fingerprint(&(
        super::run_fingerprint(&with_controller(scenario, ControllerKind::Dp), Some(policies)),
        super::run_fingerprint(&with_controller(scenario, ControllerKind::Baseline), None),
    ));
    Ok(CompareReport {
        format: "compare-v1".into(),
        scenario: scenario.name.clone(),
        fingerprint,
        impulse_ratio: bl.total_impulse_ns / dp.total_impulse_ns,
        settling_ratio: bl.max_settling_time_s / dp.max_settling_time_s,
        dp,
        baseline: bl,
        surrogate_baseline: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r_m: f64,
    pub dp_settling_s: Option<f64>,
    pub baseline_settling_s: Option<f64>,
    pub dp_impulse_ns: Option<f64>,
    pub baseline_impulse_ns: Option<f64>,
    pub impulse_ratio: Option<f64>,
    pub dp_settled: Option<bool>,
    pub baseline_settled: Option<bool>,
    /// Set when either run failed; the sweep carries on with the next radius.
    pub error: Option<String>,
}

/// Paired runs with the initial position scaled to `r` on each axis (signs from `base`).
pub fn sweep(base: &Scenario, policies: &PolicySet, radii: &[f64]) -> Vec<SweepRow> {
    radii
        .par_iter()
        .map(|&r| match compare(&base.with_range(r), policies) {
            Ok(c) => SweepRow {
                r_m: r,
                dp_settling_s: Some(c.dp.max_settling_time_s),
                baseline_settling_s: Some(c.baseline.max_settling_time_s),
                dp_impulse_ns: Some(c.dp.total_impulse_ns),
                baseline_impulse_ns: Some(c.baseline.total_impulse_ns),
                impulse_ratio: Some(c.impulse_ratio),
                dp_settled: Some(c.dp.settled),
                baseline_settled: Some(c.baseline.settled),
                error: None,
            },
            Err(e) => SweepRow {
                r_m: r,
                dp_settling_s: None,
                baseline_settling_s: None,
                dp_impulse_ns: None,
                baseline_impulse_ns: None,
                impulse_ratio: None,
                dp_settled: None,
                baseline_settled: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// r = 5, 6, …, 15 m.
pub fn default_radii() -> Vec<f64> {
    (5..=15).map(f64::from).collect()
}
