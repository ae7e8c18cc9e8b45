//! Independent oracles shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use nalgebra::Vector3;
use satctl::alloc::{LEVELS, PERIOD_MS, WINDOW_MS};
use satctl::dynamics::{Channel, FailureMask, OrbitModel, ThrusterConfig, THRUSTER_COUNT};

pub const U_ON: f64 = 0.12;
pub const U_MAX: f64 = 0.024;
pub const D: f64 = 0.0965;

/// Every admissible on-time assignment of a channel's four thrusters, scored through the
/// full 12-thruster distribution matrices: (channel force, channel torque / d).
pub fn enumerate_on_times(channel: Channel, failed: &FailureMask) -> Vec<(f64, f64)> {
    let cfg = ThrusterConfig::new(D, *failed);
    let thr = channel.thrusters();
    let step = (WINDOW_MS / LEVELS as u32) as usize;
    let times: Vec<u32> = (0..=WINDOW_MS as usize).step_by(step).map(|t| t as u32).collect();
    let mut out = Vec::new();
    for &t0 in &times {
        for &t1 in &times {
            for &t2 in &times {
                for &t3 in &times {
                    let t = [t0, t1, t2, t3];
                    // back-to-back thrusters: (0, 2) and (1, 3) in channel order
                    if (t[0] > 0 && t[2] > 0) || (t[1] > 0 && t[3] > 0) {
                        continue;
                    }
                    if (0..4).any(|k| t[k] > 0 && failed[thr[k]]) {
                        continue;
                    }
                    let mut u = [0.0; THRUSTER_COUNT];
                    for k in 0..4 {
                        u[thr[k]] = U_ON * t[k] as f64 / PERIOD_MS as f64;
                    }
                    let (f, m) = cfg.body_wrench(&u).unwrap();
                    out.push((f[channel.force_axis()], m[channel.torque_axis()] / D));
                }
            }
        }
    }
    out
}

pub fn oracle_cost(table: &[(f64, f64)], force: f64, torque: f64, w: f64) -> f64 {
    table
        .iter()
        .map(|&(f, m)| {
            let ef = f - force;
            let em = m - torque / D;
            ef * ef + w * em * em
        })
        .fold(f64::INFINITY, f64::min)
}

/// Relative motion from differencing two inertial two-body trajectories, resolved in RSW,
/// sampled once per second for `horizon` seconds.
pub fn nonlinear_relative(orbit: &OrbitModel, rho0: Vector3<f64>, horizon: usize) -> Vec<Vector3<f64>> {
    let mu = orbit.mu();
    let accel = |t: f64, dr: &Vector3<f64>| {
        let r = orbit.state_at(t).r;
        let rc = r + dr;
        -mu * rc / rc.norm().powi(3) + mu * r / r.norm().powi(3)
    };
    let target = orbit.state_at(0.0);
    let c0 = target.inertial_to_rsw().unwrap();
    let frame_rate = Vector3::new(0.0, 0.0, target.angular_momentum() / target.r.norm_squared());
    let mut dr = c0.transpose() * rho0;
    let mut dv = c0.transpose() * frame_rate.cross(&rho0);
    let h = 0.1;
    let mut out = vec![rho0];
    for n in 0..horizon * 10 {
        let t = n as f64 * h;
        let k1 = (dv, accel(t, &dr));
        let k2 = (dv + 0.5 * h * k1.1, accel(t + 0.5 * h, &(dr + 0.5 * h * k1.0)));
        let k3 = (dv + 0.5 * h * k2.1, accel(t + 0.5 * h, &(dr + 0.5 * h * k2.0)));
        let k4 = (dv + h * k3.1, accel(t + h, &(dr + h * k3.0)));
        dr += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        dv += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if (n + 1) % 10 == 0 {
            let c = orbit.state_at(t + h).inertial_to_rsw().unwrap();
            out.push(c * dr);
        }
    }
    out
}
