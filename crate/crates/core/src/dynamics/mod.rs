//! Coupled rotational and relative translational dynamics of the chaser.

pub mod orbit;
pub mod quat;
pub mod thrusters;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use orbit::{relative_accel, rsw_from_rv, OrbitElements, OrbitModel, RelativeFrame, TargetState, MU_EARTH};
pub use quat::{controller_angles, quat_rate, Quaternion};
pub use thrusters::{no_failures, single_failure, Channel, DistributionMatrix, FailureMask, ThrusterConfig, THRUSTER_COUNT};

/// Portion of each control period during which thrusters may fire.
pub const THRUST_WINDOW_FRACTION: f64 = 0.2;

/// Mass, thruster and inertia properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SatelliteParamsFile", into = "SatelliteParamsFile")]
pub struct SatelliteParams {
    mass: f64,
    u_on: f64,
    lever_arm: f64,
    inertia: Matrix3<f64>,
    inertia_inv: Matrix3<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SatelliteParamsFile {
    mass_kg: f64,
    thrust_n: f64,
    lever_arm_m: f64,
    inertia_kgm2: [[f64; 3]; 3],
}

impl TryFrom<SatelliteParamsFile> for SatelliteParams {
    type Error = Error;
    fn try_from(f: SatelliteParamsFile) -> Result<Self> {
        let j = Matrix3::from_fn(|r, c| f.inertia_kgm2[r][c]);
        SatelliteParams::new(f.mass_kg, f.thrust_n, f.lever_arm_m, j)
    }
}

impl From<SatelliteParams> for SatelliteParamsFile {
    fn from(p: SatelliteParams) -> Self {
        Self {
            mass_kg: p.mass,
            thrust_n: p.u_on,
            lever_arm_m: p.lever_arm,
            inertia_kgm2: std::array::from_fn(|r| std::array::from_fn(|c| p.inertia[(r, c)])),
        }
    }
}

impl Default for SatelliteParams {
    fn default() -> Self {
        Self::spheres()
    }
}

impl SatelliteParams {
    pub fn new(mass: f64, u_on: f64, lever_arm: f64, inertia: Matrix3<f64>) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::config("satellite.mass_kg", "must be > 0"));
        }
        if !(u_on > 0.0) {
            return Err(Error::config("satellite.thrust_n", "must be > 0"));
        }
        if !(lever_arm > 0.0) {
            return Err(Error::config("satellite.lever_arm_m", "must be > 0"));
        }
        if (inertia - inertia.transpose()).abs().max() > 1e-12 * inertia.abs().max() {
            return Err(Error::config("satellite.inertia_kgm2", "must be symmetric"));
        }
        if inertia.cholesky().is_none() {
            return Err(Error::config("satellite.inertia_kgm2", "must be positive definite"));
        }
        let inertia_inv = inertia
            .try_inverse()
            .ok_or_else(|| Error::config("satellite.inertia_kgm2", "is singular"))?;
        Ok(Self {
            mass,
            u_on,
            lever_arm,
            inertia,
            inertia_inv,
        })
    }

    /// The twelve-thruster free flyer: 4.16 kg, 0.12 N thrusters, 9.65 cm lever arm.
    pub fn spheres() -> Self {
        let j = Matrix3::new(
            0.023, 0.0001, -0.0003, //
            0.0001, 0.0242, -0.00003, //
            -0.0003, -0.00003, 0.0214,
        );
        Self::new(4.16, 0.12, 0.0965, j).expect("built-in parameters are valid")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn u_on(&self) -> f64 {
        self.u_on
    }

    pub fn lever_arm(&self) -> f64 {
        self.lever_arm
    }

    pub fn inertia(&self) -> &Matrix3<f64> {
        &self.inertia
    }

    pub fn inertia_inv(&self) -> &Matrix3<f64> {
        &self.inertia_inv
    }

    /// Maximum average thrust per thruster over one control period.
    pub fn u_max(&self) -> f64 {
        THRUST_WINDOW_FRACTION * self.u_on
    }

    /// Principal moment about body axis `i`, used by the decoupled rotation channels.
    pub fn principal_moment(&self, i: usize) -> f64 {
        self.inertia[(i, i)]
    }
}

/// Integrated state: RSW relative position/velocity, inertial-to-body
/// quaternion and body angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub rho: Vector3<f64>,
    pub rho_dot: Vector3<f64>,
    pub q: Quaternion,
    pub omega: Vector3<f64>,
}

impl Default for SatelliteState {
    fn default() -> Self {
        Self {
            rho: Vector3::zeros(),
            rho_dot: Vector3::zeros(),
            q: Quaternion::identity(),
            omega: Vector3::zeros(),
        }
    }
}

impl SatelliteState {
    pub fn is_finite(&self) -> bool {
        self.rho.iter().all(|v| v.is_finite())
            && self.rho_dot.iter().all(|v| v.is_finite())
            && self.q.q13.iter().all(|v| v.is_finite())
            && self.q.q4.is_finite()
            && self.omega.iter().all(|v| v.is_finite())
    }

    fn axpy(&self, h: f64, d: &StateRate) -> SatelliteState {
        let qv = self.q.as_vector() + h * d.q;
        SatelliteState {
            rho: self.rho + h * d.rho,
            rho_dot: self.rho_dot + h * d.rho_dot,
            q: Quaternion::from_vector(&qv),
            omega: self.omega + h * d.omega,
        }
    }
}

/// Body-frame force (N) and torque (N·m), held constant over an integration step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyWrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

#[derive(Debug, Clone, Copy)]
struct StateRate {
    rho: Vector3<f64>,
    rho_dot: Vector3<f64>,
    q: nalgebra::Vector4<f64>,
    omega: Vector3<f64>,
}

/// Euler's rotation equation `J⁻¹(−ω×Jω + M)`.
pub fn omega_rate(omega: &Vector3<f64>, torque: &Vector3<f64>, params: &SatelliteParams) -> Vector3<f64> {
    params.inertia_inv * (-omega.cross(&(params.inertia * omega)) + torque)
}

/// `C_B^R = C_I^R C_B^I`.
pub fn body_to_rsw(q: &Quaternion, frame: &RelativeFrame) -> Matrix3<f64> {
    frame.inertial_to_rsw * q.dcm_body_to_inertial()
}

fn derivative(s: &SatelliteState, wrench: &BodyWrench, frame: &RelativeFrame, params: &SatelliteParams) -> StateRate {
    let force_rsw = body_to_rsw(&s.q, frame) * wrench.force;
    StateRate {
        rho: s.rho_dot,
        rho_dot: frame.relative_accel(&s.rho, &s.rho_dot, &force_rsw, params.mass),
        q: quat_rate(&s.q, &s.omega),
        omega: omega_rate(&s.omega, &wrench.torque, params),
    }
}

/// One classic RK4 step of the coupled dynamics over `[t, t + dt]`.
///
/// The body force is rotated into RSW at every stage using the stage attitude
/// and the target orbit at the stage time. The quaternion is renormalized
/// after the step.
pub fn rk4_step(
    state: &SatelliteState,
    wrench: &BodyWrench,
    orbit: &OrbitModel,
    params: &SatelliteParams,
    t: f64,
    dt: f64,
) -> Result<SatelliteState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("step size {dt} must be > 0")));
    }
    let f0 = orbit.frame_at(t)?;
    let fh = orbit.frame_at(t + 0.5 * dt)?;
    let f1 = orbit.frame_at(t + dt)?;
    let k1 = derivative(state, wrench, &f0, params);
    let k2 = derivative(&state.axpy(0.5 * dt, &k1), wrench, &fh, params);
    let k3 = derivative(&state.axpy(0.5 * dt, &k2), wrench, &fh, params);
    let k4 = derivative(&state.axpy(dt, &k3), wrench, &f1, params);
    let h = dt / 6.0;
    let mut next = SatelliteState {
        rho: state.rho + h * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho),
        rho_dot: state.rho_dot + h * (k1.rho_dot + 2.0 * k2.rho_dot + 2.0 * k3.rho_dot + k4.rho_dot),
        q: Quaternion::from_vector(&(state.q.as_vector() + h * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q))),
        omega: state.omega + h * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega),
    };
    next.q = next.q.normalized();
    Ok(next)
}
