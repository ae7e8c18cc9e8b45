//! Reference-model baseline controller used for fuel comparisons.
//!
//! This is a surrogate: the reference models and ideal-control bounds follow the
//! published description, but the thruster selection is a 9-pattern per-channel
//! matcher with sigma-delta accumulation rather than the original switching algorithm.

pub mod search;
pub mod tuning;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::{body_to_rsw, Channel, Quaternion, RelativeFrame, SatelliteParams, SatelliteState, ThrusterConfig, THRUSTER_COUNT};
use crate::error::{Error, Result};

/// Diagonals of the reference-model gain matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineGains {
    pub k1: [f64; 3],
    pub k2: [f64; 3],
    pub k3: [f64; 3],
    pub k4: [f64; 3],
}

impl Default for BaselineGains {
    fn default() -> Self {
        Self::published()
    }
}

impl BaselineGains {
    /// Gains tuned for the 10 m fully actuated maneuver.
    pub fn published() -> Self {
        Self {
            k1: [3.44e-2, 3.20e-2, 3.39e-2],
            k2: [3.7e-4; 3],
            k3: [3.31, 4.60, 3.23],
            k4: [0.47, 0.69, 0.48],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_vec().iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::config("baseline.gains", "every gain must be positive and finite"));
        }
        Ok(())
    }

    /// `[k1, k2, k3, k4]` flattened, 12 entries.
    pub fn to_vec(&self) -> Vec<f64> {
        [self.k1, self.k2, self.k3, self.k4].concat()
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 12 {
            return Err(Error::InvalidInput(format!("expected 12 gains, got {}", v.len())));
        }
        let g = |i: usize| [v[3 * i], v[3 * i + 1], v[3 * i + 2]];
        Ok(Self {
            k1: g(0),
            k2: g(1),
            k3: g(2),
            k4: g(3),
        })
    }

    /// Real parts of the eigenvalues of both reference models, per axis.
    pub fn eigenvalue_real_parts(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(12);
        for (c, k) in [(self.k1, self.k2), (self.k3, self.k4)] {
            for i in 0..3 {
                let disc = c[i] * c[i] - 4.0 * k[i];
                if disc >= 0.0 {
                    out.push((-c[i] + disc.sqrt()) / 2.0);
                    out.push((-c[i] - disc.sqrt()) / 2.0);
                } else {
                    out.push(-c[i] / 2.0);
                    out.push(-c[i] / 2.0);
                }
            }
        }
        out
    }
}

fn default_q1l() -> f64 {
    5e4
}

fn default_q2l() -> f64 {
    5e5
}

// Tracking rates sit at five times the natural frequency of the published reference models.
fn default_lambda_f() -> f64 {
    0.1
}

fn default_lambda_m() -> f64 {
    4.0
}

fn default_duty() -> f64 {
    crate::dynamics::THRUST_WINDOW_FRACTION
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default)]
    pub gains: BaselineGains,
    /// Position tracking weight (scalar multiple of the identity).
    #[serde(default = "default_q1l")]
    pub q1l: f64,
    /// Attitude tracking weight (scalar multiple of the identity).
    #[serde(default = "default_q2l")]
    pub q2l: f64,
    /// Tracking-error convergence rate of the ideal force (1/s).
    #[serde(default = "default_lambda_f")]
    pub lambda_f: f64,
    /// Tracking-error convergence rate of the ideal torque (1/s).
    #[serde(default = "default_lambda_m")]
    pub lambda_m: f64,
    /// Requests are divided by this fraction before pattern matching.
    #[serde(default = "default_duty")]
    pub duty: f64,
    /// Fire only inside the thrust window of each period.
    #[serde(default = "default_true")]
    pub window_only: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            gains: BaselineGains::published(),
            q1l: default_q1l(),
            q2l: default_q2l(),
            lambda_f: default_lambda_f(),
            lambda_m: default_lambda_m(),
            duty: default_duty(),
            window_only: true,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        for (name, v) in [
            ("baseline.q1l", self.q1l),
            ("baseline.q2l", self.q2l),
            ("baseline.lambda_f", self.lambda_f),
            ("baseline.lambda_m", self.lambda_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(name, "must be positive"));
            }
        }
        if !(self.duty > 0.0 && self.duty <= 1.0) {
            return Err(Error::config("baseline.duty", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Torque weight of the selection metric, in the normalized form `Q_2L / (d·Q_1L)`.
    pub fn selection_weight(&self, lever_arm: f64) -> f64 {
        self.q2l / (lever_arm * self.q1l)
    }
}

/// Attitude parameters `σ = q13 / q4` of a quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mrp(pub Vector3<f64>);

impl Mrp {
    pub fn from_quaternion(q: &Quaternion) -> Result<Self> {
        let q = q.canonical();
        if q.q4.abs() < 1e-12 {
            return Err(Error::InvalidInput("attitude parameters are singular at a half turn".into()));
        }
        Ok(Self(q.q13 / q.q4))
    }

    /// `B(σ) = I + [σ×] + σσᵀ`, so that `σ̇ = ½ B(σ) ω`.
    pub fn kinematics(&self) -> Matrix3<f64> {
        let s = self.0;
        Matrix3::identity() + s.cross_matrix() + s * s.transpose()
    }

    pub fn rate(&self, omega: &Vector3<f64>) -> Vector3<f64> {
        0.5 * self.kinematics() * omega
    }
}

/// Two decoupled second-order reference models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceModels {
    pub rho_m: Vector3<f64>,
    pub rho_m_dot: Vector3<f64>,
    pub sigma_m: Vector3<f64>,
    pub sigma_m_dot: Vector3<f64>,
    pub gains: BaselineGains,
    pub v_rho_c: Vector3<f64>,
    pub v_sigma_c: Vector3<f64>,
}

impl ReferenceModels {
    /// Models starting at the spacecraft's current position and attitude parameters.
    pub fn starting_at(state: &SatelliteState, attitude_error: &Quaternion, gains: BaselineGains) -> Result<Self> {
        let sigma = Mrp::from_quaternion(attitude_error)?;
        Ok(Self {
            rho_m: state.rho,
            rho_m_dot: state.rho_dot,
            sigma_m: sigma.0,
            sigma_m_dot: sigma.rate(&state.omega),
            gains,
            v_rho_c: Vector3::zeros(),
            v_sigma_c: Vector3::zeros(),
        })
    }

    /// `(ρ̈_m, σ̈_m)` at the current model state.
    pub fn accelerations(&self) -> (Vector3<f64>, Vector3<f64>) {
        model_accel(self, &self.rho_m, &self.rho_m_dot, &self.sigma_m, &self.sigma_m_dot)
    }
}

fn model_accel(
    m: &ReferenceModels,
    rho: &Vector3<f64>,
    rho_dot: &Vector3<f64>,
    sigma: &Vector3<f64>,
    sigma_dot: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let g = &m.gains;
    let a = Vector3::from_fn(|i, _| m.v_rho_c[i] - g.k1[i] * rho_dot[i] - g.k2[i] * rho[i]);
    let b = Vector3::from_fn(|i, _| m.v_sigma_c[i] - g.k3[i] * sigma_dot[i] - g.k4[i] * sigma[i]);
    (a, b)
}

/// One RK4 step of both reference models.
pub fn reference_step(m: &ReferenceModels, dt: f64) -> Result<ReferenceModels> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("step size {dt} must be > 0")));
    }
    type S = [Vector3<f64>; 4];
    let f = |s: &S| -> S {
        let (a, b) = model_accel(m, &s[0], &s[1], &s[2], &s[3]);
        [s[1], a, s[3], b]
    };
    let add = |s: &S, h: f64, d: &S| -> S { std::array::from_fn(|i| s[i] + h * d[i]) };
    let s0: S = [m.rho_m, m.rho_m_dot, m.sigma_m, m.sigma_m_dot];
    let k1 = f(&s0);
    let k2 = f(&add(&s0, 0.5 * dt, &k1));
    let k3 = f(&add(&s0, 0.5 * dt, &k2));
    let k4 = f(&add(&s0, dt, &k3));
    let n: S = std::array::from_fn(|i| s0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    Ok(ReferenceModels {
        rho_m: n[0],
        rho_m_dot: n[1],
        sigma_m: n[2],
        sigma_m_dot: n[3],
        ..*m
    })
}

/// Ideal body wrench after clipping to the per-axis bounds `u_on` and `d·u_on`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealControls {
    pub force_body: Vector3<f64>,
    pub torque_body: Vector3<f64>,
    pub saturated: bool,
}

/// Feedback-linearizing wrench that makes the tracking errors decay at the configured rates.
///
/// `attitude_error` is the rotation from the attitude reference to the body.
pub fn ideal_controls(
    state: &SatelliteState,
    attitude_error: &Quaternion,
    models: &ReferenceModels,
    params: &SatelliteParams,
    frame: &RelativeFrame,
    cfg: &BaselineConfig,
) -> Result<IdealControls> {
    let (rho_m_dd, sigma_m_dd) = models.accelerations();

    let (lf, lm) = (cfg.lambda_f, cfg.lambda_m);
    let e = state.rho - models.rho_m;
    let e_dot = state.rho_dot - models.rho_m_dot;
    let rho_dd = rho_m_dd - 2.0 * lf * e_dot - lf * lf * e;
    let drift = frame.relative_accel(&state.rho, &state.rho_dot, &Vector3::zeros(), params.mass());
    let force_rsw = params.mass() * (rho_dd - drift);
    let force_body = body_to_rsw(&state.q, frame).transpose() * force_rsw;

    let sigma = Mrp::from_quaternion(attitude_error)?;
    let sigma_dot = sigma.rate(&state.omega);
    let es = sigma.0 - models.sigma_m;
    let es_dot = sigma_dot - models.sigma_m_dot;
    let sigma_dd = sigma_m_dd - 2.0 * lm * es_dot - lm * lm * es;
    let s = sigma.0;
    let b_dot = sigma_dot.cross_matrix() + sigma_dot * s.transpose() + s * sigma_dot.transpose();
    let b_inv = sigma
        .kinematics()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("attitude kinematics matrix is singular".into()))?;
    let omega_dot = b_inv * (2.0 * sigma_dd - b_dot * state.omega);
    let j = params.inertia();
    let torque_body = j * omega_dot + state.omega.cross(&(j * state.omega));

    let (fmax, mmax) = (params.u_on(), params.lever_arm() * params.u_on());
    let mut saturated = false;
    let mut clip = |v: f64, lim: f64| {
        if v.abs() > lim {
            saturated = true;
        }
        v.clamp(-lim, lim)
    };
    let force_body = force_body.map(|v| clip(v, fmax));
    let torque_body = torque_body.map(|v| clip(v, mmax));
    Ok(IdealControls {
        force_body,
        torque_body,
        saturated,
    })
}

/// Per channel, the on/off pattern among the nine pair combinations whose instantaneous
/// wrench best matches the request in the metric `e_F² + W(e_M/d)²`, `W = Q_2L/(d·Q_1L)`.
/// Ties go to fewer active thrusters.
pub fn baseline_select(
    force: &Vector3<f64>,
    torque: &Vector3<f64>,
    thrusters: &ThrusterConfig,
    u_on: f64,
    cfg: &BaselineConfig,
) -> [bool; THRUSTER_COUNT] {
    let d = thrusters.lever_arm;
    let w = cfg.selection_weight(d);
    let mut on = [false; THRUSTER_COUNT];
    let mut patterns: Vec<(i32, i32)> = (-1..=1).flat_map(|a| (-1..=1).map(move |b| (a, b))).collect();
    patterns.sort_by_key(|&(a, b)| (a.abs() + b.abs(), a, b));
    for ch in Channel::ALL {
        let (fr, mr) = (force[ch.force_axis()], torque[ch.torque_axis()] / d);
        let usable = |pair: (usize, usize), s: i32| match s {
            1 => !thrusters.failed[pair.0],
            -1 => !thrusters.failed[pair.1],
            _ => true,
        };
        let mut best = (f64::INFINITY, (0, 0));
        for &(a, b) in &patterns {
            if !usable(ch.pair_a(), a) || !usable(ch.pair_b(), b) {
                continue;
            }
            let ef = (a + b) as f64 * u_on - fr;
            let em = (a - b) as f64 * u_on - mr;
            let cost = ef * ef + w * em * em;
            if cost < best.0 {
                best = (cost, (a, b));
            }
        }
        let (a, b) = best.1;
        for (pair, s) in [(ch.pair_a(), a), (ch.pair_b(), b)] {
            match s {
                1 => on[pair.0] = true,
                -1 => on[pair.1] = true,
                _ => {}
            }
        }
    }
    on
}

/// Sigma-delta wrapper around [`baseline_select`]: wrench the thrusters failed to deliver
/// on earlier ticks is added to the next request, so the average over a window tracks
/// the ideal wrench. Residuals are in the same units as the requests.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PulseSelector {
    pub residual_force: Vector3<f64>,
    pub residual_torque: Vector3<f64>,
}

impl PulseSelector {
    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn select(
        &mut self,
        force: &Vector3<f64>,
        torque: &Vector3<f64>,
        thrusters: &ThrusterConfig,
        u_on: f64,
        cfg: &BaselineConfig,
    ) -> Result<[bool; THRUSTER_COUNT]> {
        let want_f = force + self.residual_force;
        let want_m = torque + self.residual_torque;
        let on = baseline_select(&want_f, &want_m, thrusters, u_on, cfg);
        let u = on.map(|b| if b { u_on } else { 0.0 });
        let (f, m) = thrusters.body_wrench(&u)?;
        self.residual_force = want_f - f;
        self.residual_torque = want_m - m;
        Ok(on)
    }
}
