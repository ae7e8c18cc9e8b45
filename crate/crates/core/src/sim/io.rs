//! Trajectory CSV and metrics JSON.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ControllerKind, ManeuverMetrics, Sample, Trajectory};
use crate::dynamics::THRUSTER_COUNT;
use crate::error::{Error, Result};

pub const TRAJECTORY_FORMAT: &str = "trajectory-v1";
pub const METRICS_FORMAT: &str = "metrics-v1";

/// Column names of the trajectory CSV, in order.
pub fn trajectory_columns() -> Vec<String> {
    let mut c = vec!["t_s".to_string()];
    let xyz = ["x", "y", "z"];
    let axes = ["1", "2", "3"];
    c.extend(xyz.map(|a| format!("rho_{a}_m")));
    c.extend(xyz.map(|a| format!("rho_dot_{a}_mps")));
    c.extend(axes.map(|a| format!("theta{a}_deg")));
    c.extend(["q1", "q2", "q3", "q4"].map(String::from));
    c.extend(axes.map(|a| format!("omega{a}_radps")));
    c.extend(xyz.map(|a| format!("cmd_force_{a}_n")));
    c.extend(axes.map(|a| format!("cmd_torque{a}_nm")));
    c.extend(xyz.map(|a| format!("force_{a}_n")));
    c.extend(axes.map(|a| format!("torque{a}_nm")));
    c.extend((1..=THRUSTER_COUNT).map(|j| format!("thr{j}")));
    c.push("w_mf".into());
    c
}

fn to_record(s: &Sample) -> Vec<String> {
    let mut r = vec![s.t.to_string()];
    for v in [s.rho, s.rho_dot, s.theta_deg] {
        r.extend(v.iter().map(f64::to_string));
    }
    r.extend(s.q.iter().map(f64::to_string));
    for v in [s.omega, s.command_force, s.command_torque, s.force, s.torque] {
        r.extend(v.iter().map(f64::to_string));
    }
    r.extend(s.thrusters.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
    r.push(s.w_mf.to_string());
    r
}

/// Writes `# format: trajectory-v1`, then a header row and one row per 10 ms sample.
/// Missing parent directories are created.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let wrap = |e: csv::Error| Error::Format {
        path: path.into(),
        reason: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    writeln!(file, "# format: {TRAJECTORY_FORMAT}").map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(trajectory_columns()).map_err(wrap)?;
    for s in &traj.samples {
        w.write_record(to_record(s)).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trajectory CSV back. `u_on` is not stored in the file and must be supplied.
pub fn read_trajectory_csv(path: &Path, u_on: f64) -> Result<Trajectory> {
    let bad = |reason: String| Error::Format {
        path: path.into(),
        reason,
    };
    let mut reader = BufReader::new(std::fs::File::open(path).map_err(|e| Error::io(path, e))?);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    if first.trim_end() != format!("# format: {TRAJECTORY_FORMAT}") {
        return Err(bad(format!("expected '# format: {TRAJECTORY_FORMAT}' on the first line")));
    }
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if header != trajectory_columns() {
        return Err(bad("column set does not match trajectory-v1".into()));
    }
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("'{f}': {e}"))))
            .collect::<Result<_>>()?;
        let a3 = |k: usize| [v[k], v[k + 1], v[k + 2]];
        samples.push(Sample {
            t: v[0],
            rho: a3(1),
            rho_dot: a3(4),
            theta_deg: a3(7),
            q: [v[10], v[11], v[12], v[13]],
            omega: a3(14),
            command_force: a3(17),
            command_torque: a3(20),
            force: a3(23),
            torque: a3(26),
            thrusters: std::array::from_fn(|j| v[29 + j] != 0.0),
            w_mf: v[29 + THRUSTER_COUNT],
        });
    }
    Ok(Trajectory { samples, u_on })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format: String,
    pub scenario: String,
    pub controller: ControllerKind,
    /// The baseline controller is a reconstruction, not the published algorithm.
    pub surrogate_baseline: bool,
    pub fingerprint: String,
    #[serde(flatten)]
    pub metrics: ManeuverMetrics,
}

impl MetricsReport {
    pub fn new(scenario: &str, controller: ControllerKind, fingerprint: String, metrics: ManeuverMetrics) -> Self {
        Self {
            format: METRICS_FORMAT.into(),
            scenario: scenario.into(),
            controller,
            surrogate_baseline: controller == ControllerKind::Baseline,
            fingerprint,
            metrics,
        }
    }
}
