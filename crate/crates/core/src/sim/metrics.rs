use serde::{Deserialize, Serialize};

use super::{Bands, Trajectory, STEP_S};

/// Channel labels in metric order.
pub const CHANNELS: [&str; 6] = ["x", "y", "z", "theta1", "theta2", "theta3"];

/// Impulse is counted up to this long after the last channel settles (s).
pub const IMPULSE_TAIL_S: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverMetrics {
    /// Position x, y, z then attitude 1, 2, 3.
    pub settling_time_s: [f64; 6],
    pub max_settling_time_s: f64,
    /// False when some channel is still outside its band at the last sample.
    pub settled: bool,
    pub unsettled_channels: Vec<String>,
    /// Impulse up to `max_settling_time_s + 10 s` (N·s).
    pub total_impulse_ns: f64,
    /// Impulse over the whole horizon (N·s).
    pub total_impulse_full_ns: f64,
    /// Largest position error component after the maneuver settled (m).
    pub pos_max_sse_m: f64,
    /// Largest controller angle magnitude after the maneuver settled (deg).
    pub att_max_sse_deg: f64,
    pub horizon_s: f64,
}

/// Per channel, the time of the last entry into the band without leaving again.
///
/// A channel that is outside its band at the final sample gets the horizon and is
/// flagged. Steady-state errors are maxima over samples at or after the largest settling
/// time; with no such sample the last one is used.
pub fn compute_metrics(traj: &Trajectory, bands: &Bands, horizon_s: f64) -> ManeuverMetrics {
    let s = &traj.samples;
    let channel = |c: usize, k: usize| -> f64 {
        if c < 3 {
            s[k].rho[c]
        } else {
            s[k].theta_deg[c - 3]
        }
    };
    let mut settling = [0.0; 6];
    let mut unsettled = Vec::new();
    for c in 0..6 {
        let band = if c < 3 { bands.position_m } else { bands.attitude_deg };
        match (0..s.len()).rev().find(|&k| channel(c, k).abs() > band) {
            None => settling[c] = 0.0,
            Some(k) if k + 1 == s.len() => {
                settling[c] = horizon_s;
                unsettled.push(CHANNELS[c].to_string());
            }
            Some(k) => settling[c] = s[k + 1].t,
        }
    }
    let max_settling = settling.iter().copied().fold(0.0, f64::max);

    let per_sample = traj.u_on * STEP_S;
    let fired = |k: usize| s[k].thrusters.iter().filter(|&&b| b).count() as f64;
    let cutoff = max_settling + IMPULSE_TAIL_S;
    let total_impulse_ns = (0..s.len()).filter(|&k| s[k].t < cutoff).map(fired).sum::<f64>() * per_sample;
    let total_impulse_full_ns = (0..s.len()).map(fired).sum::<f64>() * per_sample;

    let mut tail: Vec<usize> = (0..s.len()).filter(|&k| s[k].t >= max_settling).collect();
    if tail.is_empty() && !s.is_empty() {
        tail.push(s.len() - 1);
    }
    let max_abs = |range: std::ops::Range<usize>| {
        tail.iter()
            .flat_map(|&k| range.clone().map(move |c| (k, c)))
            .map(|(k, c)| channel(c, k).abs())
            .fold(0.0, f64::max)
    };
    ManeuverMetrics {
        settling_time_s: settling,
        max_settling_time_s: max_settling,
        settled: unsettled.is_empty(),
        unsettled_channels: unsettled,
        total_impulse_ns,
        total_impulse_full_ns,
        pos_max_sse_m: max_abs(0..3),
        att_max_sse_deg: max_abs(3..6),
        horizon_s,
    }
}
