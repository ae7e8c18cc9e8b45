//! Scenario and DP design files (JSON).

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::baseline::BaselineConfig;
use crate::dp::{DpProblem, DynamicsKind, ErrorKind, Spacing};
use crate::dynamics::{no_failures, OrbitElements, SatelliteParams, ThrusterConfig};
use crate::error::{Error, Result};
use crate::fault::{reconfigure_bounds, FaultConfig};

pub const SCENARIO_FORMAT: &str = "scenario-v1";
pub const DESIGN_FORMAT: &str = "dp-design-v1";

fn default_points() -> usize {
    701
}

fn default_actions() -> usize {
    41
}

fn default_dt() -> f64 {
    1.0
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

fn design_format() -> String {
    DESIGN_FORMAT.into()
}

fn scenario_format() -> String {
    SCENARIO_FORMAT.into()
}

/// Translation channel design: position in m, velocity in m/s, force in N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationDesign {
    pub position_range_m: f64,
    pub velocity_range_mps: f64,
    pub q: [[f64; 2]; 2],
    /// Weights for the channel whose force axis carries the failed thruster.
    #[serde(default)]
    pub q_faulty: Option<[[f64; 2]; 2]>,
    pub r: f64,
    pub stages: usize,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default = "default_actions")]
    pub action_points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

/// Rotation channel design: angle in degrees, rate in rad/s, torque in N·m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationDesign {
    pub angle_range_deg: f64,
    pub rate_range_radps: f64,
    pub q: [[f64; 2]; 2],
    #[serde(default)]
    pub q_faulty: Option<[[f64; 2]; 2]>,
    pub r: f64,
    pub stages: usize,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default = "default_actions")]
    pub action_points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
    /// Attitude reference angle in degrees, shared by the three axes.
    #[serde(default)]
    pub reference_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpDesign {
    #[serde(default = "design_format")]
    pub format: String,
    pub translation: TranslationDesign,
    pub rotation: RotationDesign,
}

impl DpDesign {
    pub fn load(path: &Path) -> Result<Self> {
        let d: DpDesign = read_json(path)?;
        if d.format != DESIGN_FORMAT {
            return Err(Error::config("format", format!("expected {DESIGN_FORMAT}, found {}", d.format)));
        }
        Ok(d)
    }

    /// Channel problems `[x, y, z]` for translation (RSW axes) and `[1, 2, 3]` for rotation
    /// (body axes). Under a failure, the channel along the failed thruster's force axis and
    /// the one about its torque axis take the faulty weights, and every channel's action
    /// grid keeps only what the operative thrusters can produce. Faulty translation grids start
    /// from the single-channel body bound `2·u_max`, since the lost capability is body-fixed.
    pub fn problems(&self, params: &SatelliteParams, fault: Option<&FaultConfig>) -> Result<([DpProblem; 3], [DpProblem; 3])> {
        let mask = match fault {
            Some(f) => f.mask()?,
            None => no_failures(),
        };
        let thrusters = ThrusterConfig::new(params.lever_arm(), mask);
        let force_axis = fault.map(|f| f.failed_force_direction()).transpose()?.map(|d| d.0);
        let torque_axis = fault.map(|f| f.failed_torque_direction()).transpose()?.map(|d| d.0);
        let t = &self.translation;
        let r = &self.rotation;
        let force_bound = match fault {
            Some(_) => 2.0 * params.u_max(),
            None => 2.0 * 3f64.sqrt() * params.u_max(),
        };
        let translation = std::array::from_fn(|axis| {
            let q = match (force_axis == Some(axis), t.q_faulty) {
                (true, Some(qf)) => qf,
                _ => t.q,
            };
            let base = DpProblem {
                dynamics: DynamicsKind::Translation,
                inertia: params.mass(),
                s1_range: t.position_range_m,
                s2_range: t.velocity_range_mps,
                n1: t.grid_points,
                n2: t.grid_points,
                spacing: t.spacing,
                action_bound: force_bound,
                n_actions: t.action_points,
                action_scale: [1.0, 1.0],
                q,
                r: t.r,
                terminal: [[0.0; 2]; 2],
                stages: t.stages,
                dt: t.dt_s,
                error: ErrorKind::Plain,
                reference: 0.0,
            };
            reconfigure_bounds(&base, &thrusters, axis)
        });
        let rotation = std::array::from_fn(|axis| {
            let q = match (torque_axis == Some(axis), r.q_faulty) {
                (true, Some(qf)) => qf,
                _ => r.q,
            };
            let base = DpProblem {
                dynamics: DynamicsKind::Rotation,
                inertia: params.principal_moment(axis),
                s1_range: r.angle_range_deg.to_radians(),
                s2_range: r.rate_range_radps,
                n1: r.grid_points,
                n2: r.grid_points,
                spacing: r.spacing,
                action_bound: 2.0 * params.u_max() * params.lever_arm(),
                n_actions: r.action_points,
                action_scale: [1.0, 1.0],
                q,
                r: r.r,
                terminal: [[0.0; 2]; 2],
                stages: r.stages,
                dt: r.dt_s,
                error: ErrorKind::SineWrapped,
                reference: r.reference_deg.to_radians(),
            };
            reconfigure_bounds(&base, &thrusters, axis)
        });
        for p in translation.iter().chain(rotation.iter()) {
            p.validate()?;
        }
        Ok((translation, rotation))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Dp,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    /// Relative position in RSW (m).
    pub rho_m: [f64; 3],
    #[serde(default)]
    pub rho_dot_mps: [f64; 3],
    /// Rotations about body x, then y, then z relative to the attitude reference (deg).
    #[serde(default)]
    pub angles_deg: [f64; 3],
    #[serde(default)]
    pub omega_radps: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bands {
    pub position_m: f64,
    pub attitude_deg: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self {
            position_m: 0.2,
            attitude_deg: 2.0,
        }
    }
}

/// Where a DP scenario finds its policies. Relative paths resolve against the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySource {
    /// Directory holding `translation_{x,y,z}.policy` and `rotation_{1,2,3}.policy`.
    pub dir: PathBuf,
    /// Design file the policies were solved from.
    #[serde(default)]
    pub design: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "scenario_format")]
    pub format: String,
    pub name: String,
    pub initial: InitialConditions,
    #[serde(default = "OrbitElements::iss_like")]
    pub orbit: OrbitElements,
    #[serde(default)]
    pub satellite: SatelliteParams,
    pub controller: ControllerKind,
    #[serde(default)]
    pub fault: Option<FaultConfig>,
    pub horizon_s: f64,
    #[serde(default)]
    pub policies: Option<PolicySource>,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub bands: Bands,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    /// Reads a scenario and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut s: Scenario = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = s.policies.as_mut() {
            p.dir = base.join(&p.dir);
            p.design = p.design.as_ref().map(|d| base.join(d));
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != SCENARIO_FORMAT {
            return Err(Error::config("format", format!("expected {SCENARIO_FORMAT}, found {}", self.format)));
        }
        if !(self.horizon_s >= 0.0) || self.horizon_s.fract() != 0.0 || !self.horizon_s.is_finite() {
            return Err(Error::config("horizon_s", "must be a nonnegative whole number of 1 s control periods"));
        }
        let finite = |v: &[f64; 3]| v.iter().all(|x| x.is_finite());
        let ic = &self.initial;
        if !(finite(&ic.rho_m) && finite(&ic.rho_dot_mps) && finite(&ic.angles_deg) && finite(&ic.omega_radps)) {
            return Err(Error::config("initial", "all initial conditions must be finite"));
        }
        self.orbit.validate()?;
        if let Some(f) = &self.fault {
            f.validate()?;
        }
        self.baseline.validate()?;
        if !(self.bands.position_m > 0.0) || !(self.bands.attitude_deg > 0.0) {
            return Err(Error::config("bands", "must be positive"));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(self)
    }

    /// Same scenario with the initial position scaled to `r` along each axis, keeping signs.
    pub fn with_range(&self, r: f64) -> Scenario {
        let mut s = self.clone();
        s.initial.rho_m = self.initial.rho_m.map(|v| if v < 0.0 { -r } else { r });
        s
    }

    pub fn initial_rho(&self) -> Vector3<f64> {
        Vector3::from(self.initial.rho_m)
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.into(),
        reason: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
