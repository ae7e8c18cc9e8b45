//! Offline tuning of the stable-side weight as a function of approach distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DistanceTable, Knot};
use crate::error::{Error, Result};
use crate::sim::{run, ManeuverMetrics, PolicySet, Scenario, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultTuneOptions {
    pub distances_m: Vec<f64>,
    /// Candidate weights; each must lie in [0.9, 1.1].
    pub candidates: Vec<f64>,
    /// Runs whose body rate ever exceeds this are unstable (rad/s).
    pub rate_limit_radps: f64,
}

impl Default for FaultTuneOptions {
    fn default() -> Self {
        Self {
            distances_m: (1..=10).map(f64::from).collect(),
            candidates: (0..=10).map(|k| 0.90 + 0.02 * k as f64).collect(),
            rate_limit_radps: 2.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotReport {
    pub distance_m: f64,
    pub w_mf: f64,
    /// Largest excursion past the target against the initial offset (m); None when unstable.
    pub overshoot_m: Option<f64>,
    pub flagged: bool,
}

/// Largest distance travelled past the target on any axis, measured against the initial sign.
pub fn overshoot(traj: &Trajectory) -> f64 {
    let Some(first) = traj.samples.first() else {
        return 0.0;
    };
    let sign = first.rho.map(f64::signum);
    traj.samples
        .iter()
        .flat_map(|s| (0..3).map(move |i| -sign[i] * s.rho[i]))
        .fold(0.0, f64::max)
}

fn max_rate(traj: &Trajectory) -> f64 {
    traj.samples
        .iter()
        .flat_map(|s| s.omega)
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// All three position channels end inside their band.
fn position_settled(m: &ManeuverMetrics) -> bool {
    !m.unsettled_channels.iter().any(|c| ["x", "y", "z"].contains(&c.as_str()))
}

/// For each distance, the stable candidate weight with the least overshoot. A run is stable
/// when its position converges and its body rate stays within the limit.
///
/// The scenario must carry a fault. Distances where no candidate converges are flagged and
/// take the previous knot's weight (the configured stable weight for the first knot).
pub fn tune_distance_table(
    scenario: &Scenario,
    policies: &PolicySet,
    opts: &FaultTuneOptions,
) -> Result<(DistanceTable, Vec<KnotReport>)> {
    let fault = scenario
        .fault
        .as_ref()
        .ok_or_else(|| Error::config("fault", "distance-table tuning needs a failed thruster"))?;
    if opts.candidates.is_empty() || opts.candidates.iter().any(|w| !(0.9..=1.1).contains(w)) {
        return Err(Error::config("candidates", "need at least one weight, all in [0.9, 1.1]"));
    }
    let mut reports = Vec::with_capacity(opts.distances_m.len());
    let mut previous = fault.w_mf_stable;
    for &d in &opts.distances_m {
        let trials: Vec<(f64, Option<f64>)> = opts
            .candidates
            .par_iter()
            .map(|&w| {
                let mut s = scenario.with_range(d);
                let f = s.fault.as_mut().expect("checked above");
                f.distance_table = None;
                f.w_mf_stable = w;
                let score = run(&s, Some(policies)).ok().and_then(|out| {
                    let ok = position_settled(&out.metrics) && max_rate(&out.trajectory) <= opts.rate_limit_radps;
                    ok.then(|| overshoot(&out.trajectory))
                });
                (w, score)
            })
            .collect();
        let best = trials
            .iter()
            .filter_map(|&(w, o)| o.map(|o| (w, o)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then((a.0 - previous).abs().total_cmp(&(b.0 - previous).abs())));
        let report = match best {
            Some((w, o)) => KnotReport {
                distance_m: d,
                w_mf: w,
                overshoot_m: Some(o),
                flagged: false,
            },
            None => KnotReport {
                distance_m: d,
                w_mf: previous,
                overshoot_m: None,
                flagged: true,
            },
        };
        previous = report.w_mf;
        reports.push(report);
    }
    let table = DistanceTable {
        knots: reports
            .iter()
            .map(|r| Knot {
                distance_m: r.distance_m,
                w_mf: r.w_mf,
                flagged: r.flagged,
            })
            .collect(),
    };
    table.validate()?;
    Ok((table, reports))
}
