//! Single-thruster failure handling: reduced DP action bounds, approach-side
//! classification and the allocation weight schedule.

pub mod tuning;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::container::{self, ArrayData};
use crate::dp::{DpProblem, DynamicsKind};
use crate::dynamics::{single_failure, FailureMask, SatelliteState, ThrusterConfig};
use crate::error::{Error, Result};

pub const DISTANCE_TABLE_KIND: &str = "wmf-distance-table";

/// Allocation weight for a fully actuated spacecraft.
pub const W_MF_NOMINAL: f64 = 1.0;

fn default_stable() -> f64 {
    0.93
}

fn default_priority() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    /// 1-based thruster label.
    pub failed_thruster: usize,
    #[serde(default = "default_stable")]
    pub w_mf_stable: f64,
    #[serde(default = "default_priority")]
    pub w_mf_attitude_priority: f64,
    /// Knots over approach distance; when absent the stable weight is used at every distance.
    #[serde(default)]
    pub distance_table: Option<DistanceTable>,
}

impl FaultConfig {
    pub fn new(failed_thruster: usize) -> Self {
        Self {
            failed_thruster,
            w_mf_stable: default_stable(),
            w_mf_attitude_priority: default_priority(),
            distance_table: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        single_failure(self.failed_thruster)?;
        if !(0.9..=1.1).contains(&self.w_mf_stable) {
            return Err(Error::config("fault.w_mf_stable", "must lie in [0.9, 1.1]"));
        }
        if !(self.w_mf_attitude_priority > 0.0) || !self.w_mf_attitude_priority.is_finite() {
            return Err(Error::config("fault.w_mf_attitude_priority", "must be positive"));
        }
        if let Some(t) = &self.distance_table {
            t.validate()?;
        }
        Ok(())
    }

    pub fn mask(&self) -> Result<FailureMask> {
        single_failure(self.failed_thruster)
    }

    /// Body force axis and sign of the failed thruster.
    pub fn failed_force_direction(&self) -> Result<(usize, f64)> {
        Ok(ThrusterConfig::new(1.0, self.mask()?).force_direction(self.failed_thruster - 1))
    }

    pub fn failed_torque_direction(&self) -> Result<(usize, f64)> {
        Ok(ThrusterConfig::new(1.0, self.mask()?).torque_direction(self.failed_thruster - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub distance_m: f64,
    pub w_mf: f64,
    /// Tuning did not converge here; the value was copied from a neighbor.
    #[serde(default)]
    pub flagged: bool,
}

/// Piecewise-linear `W_mf(distance)`, clamped beyond the end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub knots: Vec<Knot>,
}

impl DistanceTable {
    /// Knots at 1, 2, …, 10 m all holding `w_mf`.
    pub fn constant(w_mf: f64) -> Self {
        Self {
            knots: (1..=10)
                .map(|d| Knot {
                    distance_m: d as f64,
                    w_mf,
                    flagged: false,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() {
            return Err(Error::config("distance_table", "needs at least one knot"));
        }
        if !self.knots.windows(2).all(|w| w[0].distance_m < w[1].distance_m) {
            return Err(Error::config("distance_table", "distances must be strictly increasing"));
        }
        if self.knots.iter().any(|k| !(k.w_mf > 0.0) || !k.w_mf.is_finite()) {
            return Err(Error::config("distance_table", "weights must be positive"));
        }
        Ok(())
    }

    pub fn interpolate(&self, distance: f64) -> f64 {
        let k = &self.knots;
        if distance <= k[0].distance_m {
            return k[0].w_mf;
        }
        let last = k[k.len() - 1];
        if distance >= last.distance_m {
            return last.w_mf;
        }
        let i = k.partition_point(|n| n.distance_m <= distance) - 1;
        let t = (distance - k[i].distance_m) / (k[i + 1].distance_m - k[i].distance_m);
        k[i].w_mf + t * (k[i + 1].w_mf - k[i].w_mf)
    }

    pub fn save(&self, path: &Path, meta: serde_json::Value) -> Result<()> {
        let n = self.knots.len();
        let arrays = vec![
            ("distance_m".to_string(), vec![n], ArrayData::F64(self.knots.iter().map(|k| k.distance_m).collect())),
            ("w_mf".to_string(), vec![n], ArrayData::F64(self.knots.iter().map(|k| k.w_mf).collect())),
            ("flagged".to_string(), vec![n], ArrayData::U32(self.knots.iter().map(|k| k.flagged as u32).collect())),
        ];
        container::write(path, DISTANCE_TABLE_KIND, &meta, &arrays)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = container::read(path, DISTANCE_TABLE_KIND)?;
        let d = f.f64("distance_m", 1)?.0;
        let w = f.f64("w_mf", 1)?.0;
        let fl = f.u32("flagged", 1)?.0;
        if d.len() != w.len() || d.len() != fl.len() {
            return Err(Error::Format { path: path.into(), reason: "knot arrays differ in length".into() });
        }
        let table = Self {
            knots: (0..d.len())
                .map(|i| Knot {
                    distance_m: d[i],
                    w_mf: w[i],
                    flagged: fl[i] != 0,
                })
                .collect(),
        };
        table.validate()?;
        Ok(table)
    }
}

/// Restricts the action grid of a channel problem to what the operative thrusters can produce.
///
/// `axis` is the body axis the problem acts along (translation) or about (rotation).
/// Each direction keeps the fraction of its thrusters still operative; the grid step is unchanged.
pub fn reconfigure_bounds(base: &DpProblem, thrusters: &ThrusterConfig, axis: usize) -> DpProblem {
    let cap = |sign: f64| match base.dynamics {
        DynamicsKind::Translation => thrusters.force_capability(axis, sign),
        DynamicsKind::Rotation => thrusters.torque_capability(axis, sign),
    };
    let mut p = base.clone();
    p.action_scale = [base.action_scale[0] * cap(-1.0), base.action_scale[1] * cap(1.0)];
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Braking the approach needs only fully paired thrusters.
    StableSide,
    /// Braking the approach needs force along the failed thruster's direction.
    UnstableSide,
}

/// Unstable iff the relative position on the failed thruster's channel has the same sign as
/// that thruster's force direction, so braking the approach would need the failed thruster.
///
/// The test uses the channel's RSW position and ignores the current attitude: a flip
/// during the maneuver does not change which side of the target the approach comes from.
pub fn classify_side(state: &SatelliteState, fault: &FaultConfig) -> Result<Side> {
    let (axis, sign) = fault.failed_force_direction()?;
    Ok(if state.rho[axis] * sign > 0.0 {
        Side::UnstableSide
    } else {
        Side::StableSide
    })
}

/// Distance used by the weight schedule: the largest relative position component.
pub fn approach_distance(state: &SatelliteState) -> f64 {
    state.rho.amax()
}

/// Allocation weight for the current period.
pub fn schedule_wmf(distance: f64, fault: Option<&FaultConfig>, side: Side) -> f64 {
    match fault {
        None => W_MF_NOMINAL,
        Some(f) => match side {
            Side::UnstableSide => f.w_mf_attitude_priority,
            Side::StableSide => f
                .distance_table
                .as_ref()
                .map_or(f.w_mf_stable, |t| t.interpolate(distance)),
        },
    }
}
