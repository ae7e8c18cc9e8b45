//! Closed-loop scenario simulation at the 10 ms pulse quantum with 1 s control periods.

pub mod config;
pub mod io;
pub mod metrics;
pub mod policies;
pub mod sweep;

pub use config::{Bands, ControllerKind, DpDesign, InitialConditions, PolicySource, RotationDesign, Scenario, TranslationDesign};
pub use metrics::{compute_metrics, ManeuverMetrics};
pub use policies::PolicySet;
pub use sweep::{compare, default_radii, sweep, CompareReport, SweepRow};

use nalgebra::Vector3;

use crate::alloc::{desired_wrench_to_body, Allocator, ThrusterSchedule, PERIOD_MS, WINDOW_MS};
use crate::baseline::{ideal_controls, reference_step, BaselineConfig, PulseSelector, ReferenceModels};
use crate::dynamics::{
    controller_angles, no_failures, rk4_step, BodyWrench, OrbitModel, Quaternion, SatelliteState, ThrusterConfig,
    THRUSTER_COUNT,
};
use crate::error::{Error, Result};
use crate::fault::{approach_distance, classify_side, schedule_wmf, Side};

/// Integration step and minimum pulse (s).
pub const STEP_S: f64 = 0.01;
const STEP_MS: u32 = 10;
const TICKS_PER_PERIOD: u64 = (PERIOD_MS / STEP_MS) as u64;

/// One logged sample, taken at the start of a 10 ms step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub rho: [f64; 3],
    pub rho_dot: [f64; 3],
    /// Per-axis controller angles of the attitude error (deg).
    pub theta_deg: [f64; 3],
    /// Inertial-to-body quaternion, scalar last.
    pub q: [f64; 4],
    pub omega: [f64; 3],
    /// Body wrench requested by the controller for this period (baseline: this step).
    pub command_force: [f64; 3],
    pub command_torque: [f64; 3],
    /// Body wrench produced by the thrusters during this step.
    pub force: [f64; 3],
    pub torque: [f64; 3],
    pub thrusters: [bool; THRUSTER_COUNT],
    pub w_mf: f64,
}

/// Samples on a uniform 10 ms time base.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Thruster force when on (N).
    pub u_on: f64,
}

impl Trajectory {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total on-time of thruster `j` in ms.
    pub fn on_time_ms(&self, j: usize) -> u64 {
        self.samples.iter().filter(|s| s.thrusters[j]).count() as u64 * STEP_MS as u64
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub metrics: ManeuverMetrics,
    pub fingerprint: String,
}

/// Attitude reference: the RSW frame at epoch, held inertially fixed.
pub fn attitude_reference(orbit: &OrbitModel) -> Result<Quaternion> {
    Ok(Quaternion::from_dcm_inertial_to_body(&orbit.frame_at(0.0)?.inertial_to_rsw))
}

/// Rotation from the attitude reference to the body.
pub fn attitude_error(q: &Quaternion, reference: &Quaternion) -> Quaternion {
    q.compose(&reference.conjugate())
}

pub fn initial_state(scenario: &Scenario, reference: &Quaternion) -> SatelliteState {
    let ic = &scenario.initial;
    let angles = Vector3::from(ic.angles_deg).map(f64::to_radians);
    SatelliteState {
        rho: Vector3::from(ic.rho_m),
        rho_dot: Vector3::from(ic.rho_dot_mps),
        q: Quaternion::from_axis_sequence_xyz(&angles).compose(reference).normalized(),
        omega: Vector3::from(ic.omega_radps),
    }
}

enum Controller<'a> {
    Dp {
        policies: &'a PolicySet,
        allocator: Allocator,
        schedule: ThrusterSchedule,
    },
    Baseline {
        cfg: &'a BaselineConfig,
        models: ReferenceModels,
        selector: PulseSelector,
    },
}

/// Runs a scenario to its horizon. DP scenarios need `policies`.
pub fn run(scenario: &Scenario, policies: Option<&PolicySet>) -> Result<SimOutput> {
    scenario.validate()?;
    let params = &scenario.satellite;
    let orbit = OrbitModel::new(scenario.orbit)?;
    let reference = attitude_reference(&orbit)?;
    let mask = match &scenario.fault {
        Some(f) => f.mask()?,
        None => no_failures(),
    };
    let thrusters = ThrusterConfig::new(params.lever_arm(), mask);
    let u_on = params.u_on();
    let mut state = initial_state(scenario, &reference);
    controller_angles(&attitude_error(&state.q, &reference))?;

    let mut controller = match scenario.controller {
        ControllerKind::Dp => Controller::Dp {
            policies: policies.ok_or_else(|| Error::InvalidInput("DP scenario needs policies".into()))?,
            allocator: Allocator::new(u_on, params.lever_arm(), mask),
            schedule: ThrusterSchedule::default(),
        },
        ControllerKind::Baseline => Controller::Baseline {
            cfg: &scenario.baseline,
            models: ReferenceModels::starting_at(
                &state,
                &attitude_error(&state.q, &reference),
                scenario.baseline.gains,
            )?,
            selector: PulseSelector::default(),
        },
    };

    let ticks = (scenario.horizon_s / STEP_S).round() as u64;
    let mut samples = Vec::with_capacity(ticks as usize);
    let mut command = BodyWrench::default();
    let mut w_mf = match scenario.controller {
        ControllerKind::Dp => schedule_wmf(0.0, None, Side::StableSide),
        ControllerKind::Baseline => scenario.baseline.selection_weight(params.lever_arm()),
    };
    for n in 0..ticks {
        let t = n as f64 * STEP_S;
        let offset_ms = (n % TICKS_PER_PERIOD) as u32 * STEP_MS;
        let q_err = attitude_error(&state.q, &reference);
        let theta = controller_angles(&q_err)?;
        let on: [bool; THRUSTER_COUNT] = match &mut controller {
            Controller::Dp {
                policies,
                allocator,
                schedule,
            } => {
                if offset_ms == 0 {
                    let frame = orbit.frame_at(t)?;
                    let force_rsw = Vector3::from_fn(|i, _| policies.translation[i].lookup(state.rho[i], state.rho_dot[i]));
                    let torque = Vector3::from_fn(|i, _| policies.rotation[i].lookup(theta[i], state.omega[i]));
                    let force = desired_wrench_to_body(&force_rsw, &state.q, &frame);
                    w_mf = match &scenario.fault {
                        Some(f) => schedule_wmf(approach_distance(&state), Some(f), classify_side(&state, f)?),
                        None => schedule_wmf(approach_distance(&state), None, Side::StableSide),
                    };
                    *schedule = allocator.allocate_all(&force, &torque, [w_mf; 3])?.0;
                    command = BodyWrench { force, torque };
                }
                std::array::from_fn(|j| schedule.is_on(j, offset_ms))
            }
            Controller::Baseline { cfg, models, selector } => {
                if offset_ms == 0 {
                    selector.reset();
                }
                let out = if cfg.window_only && offset_ms >= WINDOW_MS {
                    command = BodyWrench::default();
                    [false; THRUSTER_COUNT]
                } else {
                    let frame = orbit.frame_at(t)?;
                    let ideal = ideal_controls(&state, &q_err, models, params, &frame, cfg)?;
                    command = BodyWrench {
                        force: ideal.force_body,
                        torque: ideal.torque_body,
                    };
                    let scale = if cfg.window_only { 1.0 / cfg.duty } else { 1.0 };
                    selector.select(&(ideal.force_body * scale), &(ideal.torque_body * scale), &thrusters, u_on, cfg)?
                };
                *models = reference_step(models, STEP_S)?;
                out
            }
        };
        let u: [f64; THRUSTER_COUNT] = std::array::from_fn(|j| if on[j] { u_on } else { 0.0 });
        let (force, torque) = thrusters.body_wrench(&u)?;
        samples.push(Sample {
            t,
            rho: state.rho.into(),
            rho_dot: state.rho_dot.into(),
            theta_deg: theta.map(f64::to_degrees).into(),
            q: [state.q.q13[0], state.q.q13[1], state.q.q13[2], state.q.q4],
            omega: state.omega.into(),
            command_force: command.force.into(),
            command_torque: command.torque.into(),
            force: force.into(),
            torque: torque.into(),
            thrusters: on,
            w_mf,
        });
        let next = rk4_step(&state, &BodyWrench { force, torque }, &orbit, params, t, STEP_S)?;
        if !next.is_finite() {
            return Err(Error::Numerical {
                time: t + STEP_S,
                last_good: t,
                reason: "state became non-finite".into(),
            });
        }
        state = next;
    }

    let trajectory = Trajectory { samples, u_on };
    let metrics = compute_metrics(&trajectory, &scenario.bands, scenario.horizon_s);
    Ok(SimOutput {
        trajectory,
        metrics,
        fingerprint: run_fingerprint(scenario, policies),
    })
}

/// Fingerprint of everything a run depends on.
pub fn run_fingerprint(scenario: &Scenario, policies: Option<&PolicySet>) -> String {
    let mut s = scenario.clone();
    s.policies = None;
    let policy_prints: Vec<String> = match (scenario.controller, policies) {
        (ControllerKind::Dp, Some(p)) => p.fingerprints().to_vec(),
        _ => Vec::new(),
    };
    crate::fingerprint(&(s, policy_prints))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn baseline_scenario(rho: [f64; 3], horizon_s: f64) -> Scenario {
        serde_json::from_value(serde_json::json!({
            "name": "test",
            "initial": {"rho_m": rho},
            "controller": "baseline",
            "horizon_s": horizon_s,
        }))
        .unwrap()
    }

    #[test]
    fn zero_horizon_gives_empty_trajectory() {
        let out = run(&baseline_scenario([1.0, 0.0, 0.0], 0.0), None).unwrap();
        assert!(out.trajectory.is_empty());
        assert_eq!(out.metrics.total_impulse_ns, 0.0);
        assert_eq!(out.metrics.max_settling_time_s, 0.0);
    }

    #[test]
    fn dp_without_policies_is_rejected() {
        let mut s = baseline_scenario([0.0; 3], 2.0);
        s.controller = ControllerKind::Dp;
        assert!(matches!(run(&s, None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn baseline_at_rest_never_fires() {
        let out = run(&baseline_scenario([0.0; 3], 5.0), None).unwrap();
        assert_eq!(out.trajectory.samples.len(), 500);
        assert!(out.trajectory.samples.iter().all(|s| s.thrusters.iter().all(|&b| !b)));
        assert_eq!(out.metrics.total_impulse_full_ns, 0.0);
    }

    #[test]
    fn baseline_fires_only_in_window_and_is_deterministic() {
        let mut s = baseline_scenario([2.0, -1.0, 0.5], 20.0);
        s.initial.angles_deg = [20.0, -10.0, 5.0];
        let a = run(&s, None).unwrap();
        let b = run(&s, None).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert!(a.trajectory.samples.iter().any(|s| s.thrusters.iter().any(|&b| b)));
        for (n, s) in a.trajectory.samples.iter().enumerate() {
            if (n % 100) * 10 >= 200 {
                assert!(s.thrusters.iter().all(|&b| !b), "fired at t = {}", s.t);
            }
        }
    }

    #[test]
    fn initial_angles_are_relative_to_reference() {
        let mut s = baseline_scenario([0.0; 3], 1.0);
        s.initial.angles_deg = [10.0, 0.0, 0.0];
        let out = run(&s, None).unwrap();
        let th = out.trajectory.samples[0].theta_deg;
        assert!((th[0] - 10.0).abs() < 1e-9 && th[1].abs() < 1e-9 && th[2].abs() < 1e-9, "{th:?}");
    }
}
