//! Pattern-search tuning of the reference-model gains against a DP run.

use serde::{Deserialize, Serialize};

use super::search::pattern_search;
use super::BaselineGains;
use crate::error::Result;
use crate::sim::{run, ControllerKind, Scenario, Trajectory};

/// Attitude error scale in the mismatch: 10° of angle weighs like 1 m of position.
pub const ANGLE_SCALE_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    /// Initial poll step in log10 gain units.
    pub initial_step: f64,
    pub tolerance: f64,
    pub max_evals: usize,
    /// Weight of the squared relative settling-time difference.
    pub settling_weight: f64,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            tolerance: 0.01,
            max_evals: 600,
            settling_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub gains: BaselineGains,
    pub seed_objective: f64,
    pub objective: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    pub dp_settling_s: f64,
    pub baseline_settling_s: f64,
    /// `|baseline − dp| / dp` for max settling time.
    pub settling_rel_diff: f64,
}

/// Mean over whole-second samples of `|Δρ|² + (|Δθ| / 10°)²`.
pub fn trajectory_mismatch(a: &Trajectory, b: &Trajectory) -> f64 {
    let n = a.samples.len().min(b.samples.len());
    let mut sum = 0.0;
    let mut count = 0usize;
    for k in (0..n).step_by(100) {
        let (x, y) = (&a.samples[k], &b.samples[k]);
        let dp: f64 = (0..3).map(|i| (x.rho[i] - y.rho[i]).powi(2)).sum();
        let dt: f64 = (0..3).map(|i| (x.theta_deg[i] - y.theta_deg[i]).powi(2)).sum();
        sum += dp + dt / (ANGLE_SCALE_DEG * ANGLE_SCALE_DEG);
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Tunes the twelve gains, in log space, so the baseline follows `dp` and settles when it does.
///
/// Starts from the gains in `scenario.baseline`. Runs that fail count as infinitely bad.
pub fn tune_baseline(scenario: &Scenario, dp: &Trajectory, dp_settling_s: f64, opts: &TuneOptions) -> Result<TuneReport> {
    let mut base = scenario.clone();
    base.controller = ControllerKind::Baseline;
    let evaluate = |gains: &BaselineGains| -> Option<(f64, f64)> {
        let mut s = base.clone();
        s.baseline.gains = *gains;
        let out = run(&s, None).ok()?;
        let rel = (out.metrics.max_settling_time_s - dp_settling_s) / dp_settling_s.max(1.0);
        let j = trajectory_mismatch(&out.trajectory, dp) + opts.settling_weight * rel * rel;
        Some((j, out.metrics.max_settling_time_s))
    };
    let x0: Vec<f64> = base.baseline.gains.to_vec().iter().map(|g| g.log10()).collect();
    let to_gains = |x: &[f64]| BaselineGains::from_slice(&x.iter().map(|v| 10f64.powf(*v)).collect::<Vec<_>>());
    let seed_objective = evaluate(&base.baseline.gains).map_or(f64::INFINITY, |r| r.0);
    let result = pattern_search(
        |x| match to_gains(x) {
            Ok(g) => evaluate(&g).map_or(f64::INFINITY, |r| r.0),
            Err(_) => f64::INFINITY,
        },
        &x0,
        opts.initial_step,
        opts.tolerance,
        opts.max_evals,
    )?;
    let gains = to_gains(&result.x)?;
    let baseline_settling_s = evaluate(&gains).map_or(f64::INFINITY, |r| r.1);
    Ok(TuneReport {
        gains,
        seed_objective,
        objective: result.value,
        evaluations: result.evaluations,
        budget_exhausted: result.budget_exhausted,
        dp_settling_s,
        baseline_settling_s,
        settling_rel_diff: (baseline_settling_s - dp_settling_s).abs() / dp_settling_s.max(1.0),
    })
}
