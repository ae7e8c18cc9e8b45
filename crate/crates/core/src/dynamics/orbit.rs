//! Target orbit (two-body) and linearized relative translational motion in RSW.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986004418e14;

/// Classical orbital elements of the target at t = 0. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitElements {
    pub semi_major_axis_m: f64,
    pub eccentricity: f64,
    pub inclination_deg: f64,
    #[serde(default)]
    pub raan_deg: f64,
    #[serde(default)]
    pub arg_perigee_deg: f64,
    #[serde(default)]
    pub true_anomaly_deg: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
}

fn default_mu() -> f64 {
    MU_EARTH
}

impl OrbitElements {
    /// ISS-like near-circular orbit used by the shipped scenarios.
    pub fn iss_like() -> Self {
        Self {
            semi_major_axis_m: 6_793_137.0,
            eccentricity: 0.0004,
            inclination_deg: 51.6,
            raan_deg: 0.0,
            arg_perigee_deg: 0.0,
            true_anomaly_deg: 0.0,
            mu: MU_EARTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.semi_major_axis_m > 0.0) {
            return Err(Error::config("orbit.semi_major_axis_m", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::config("orbit.eccentricity", "must lie in [0, 1)"));
        }
        if !(self.mu > 0.0) {
            return Err(Error::config("orbit.mu", "must be > 0"));
        }
        Ok(())
    }
}

/// Inertial position and velocity of the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
    pub mu: f64,
}

impl TargetState {
    pub fn angular_momentum(&self) -> f64 {
        self.r.cross(&self.v).norm()
    }

    /// `C_I^R`: inertial to RSW.
    pub fn inertial_to_rsw(&self) -> Result<Matrix3<f64>> {
        rsw_from_rv(&self.r, &self.v)
    }
}

/// Analytic two-body propagation of the target orbit.
///
/// The free-space variant has no gravity and a fixed RSW frame equal to the
/// inertial frame; it reduces the translational dynamics to a double integrator.
#[derive(Debug, Clone, Copy)]
pub struct OrbitModel {
    elements: OrbitElements,
    mean_motion: f64,
    mean_anomaly0: f64,
    pqw_to_eci: Matrix3<f64>,
    free_space: bool,
}

/// Target-frame quantities needed by one dynamics evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RelativeFrame {
    /// `C_I^R`
    pub inertial_to_rsw: Matrix3<f64>,
    /// `None` in free space.
    pub target: Option<TargetState>,
}

impl RelativeFrame {
    pub fn relative_accel(&self, rho: &Vector3<f64>, rho_dot: &Vector3<f64>, force_rsw: &Vector3<f64>, mass: f64) -> Vector3<f64> {
        match &self.target {
            Some(t) => relative_accel(rho, rho_dot, t, force_rsw, mass),
            None => force_rsw / mass,
        }
    }
}

impl OrbitModel {
    pub fn new(elements: OrbitElements) -> Result<Self> {
        elements.validate()?;
        let e = elements.eccentricity;
        let a = elements.semi_major_axis_m;
        let mean_motion = (elements.mu / (a * a * a)).sqrt();
        let nu0 = elements.true_anomaly_deg.to_radians();
        let ecc_anom0 = 2.0 * (((1.0 - e) / (1.0 + e)).sqrt() * (0.5 * nu0).tan()).atan();
        let mean_anomaly0 = ecc_anom0 - e * ecc_anom0.sin();
        let pqw_to_eci = rot3(-elements.raan_deg.to_radians())
            * rot1(-elements.inclination_deg.to_radians())
            * rot3(-elements.arg_perigee_deg.to_radians());
        Ok(Self {
            elements,
            mean_motion,
            mean_anomaly0,
            pqw_to_eci,
            free_space: false,
        })
    }

    /// Gravity-free environment with RSW fixed to the inertial axes.
    pub fn free_space() -> Self {
        Self {
            elements: OrbitElements::iss_like(),
            mean_motion: 0.0,
            mean_anomaly0: 0.0,
            pqw_to_eci: Matrix3::identity(),
            free_space: true,
        }
    }

    pub fn is_free_space(&self) -> bool {
        self.free_space
    }

    pub fn frame_at(&self, t: f64) -> Result<RelativeFrame> {
        if self.free_space {
            return Ok(RelativeFrame {
                inertial_to_rsw: Matrix3::identity(),
                target: None,
            });
        }
        let target = self.state_at(t);
        Ok(RelativeFrame {
            inertial_to_rsw: target.inertial_to_rsw()?,
            target: Some(target),
        })
    }

    pub fn elements(&self) -> &OrbitElements {
        &self.elements
    }

    pub fn mu(&self) -> f64 {
        self.elements.mu
    }

    /// Target position and velocity at time `t` seconds past epoch.
    pub fn state_at(&self, t: f64) -> TargetState {
        let e = self.elements.eccentricity;
        let a = self.elements.semi_major_axis_m;
        let mu = self.elements.mu;
        let m = self.mean_anomaly0 + self.mean_motion * t;
        let mut ea = if e < 0.8 { m } else { std::f64::consts::PI };
        for _ in 0..50 {
            let f = ea - e * ea.sin() - m;
            let step = f / (1.0 - e * ea.cos());
            ea -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (sin_e, cos_e) = ea.sin_cos();
        let sq = (1.0 - e * e).sqrt();
        let r_pf = Vector3::new(a * (cos_e - e), a * sq * sin_e, 0.0);
        let rate = (mu * a).sqrt() / (a * (1.0 - e * cos_e));
        let v_pf = Vector3::new(-rate * sin_e, rate * sq * cos_e, 0.0);
        TargetState {
            r: self.pqw_to_eci * r_pf,
            v: self.pqw_to_eci * v_pf,
            mu,
        }
    }
}

fn rot1(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

fn rot3(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `C_I^R` with rows `R̂`, `Ŝ = Ŵ × R̂`, `Ŵ = R×V/|R×V|`.
pub fn rsw_from_rv(r: &Vector3<f64>, v: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let h = r.cross(v);
    let hn = h.norm();
    if !(hn > 1e-12 * r.norm() * v.norm()) || !hn.is_finite() {
        return Err(Error::DegenerateOrbit);
    }
    let r_hat = r / r.norm();
    let w_hat = h / hn;
    let s_hat = w_hat.cross(&r_hat);
    Ok(Matrix3::from_rows(&[
        r_hat.transpose(),
        s_hat.transpose(),
        w_hat.transpose(),
    ]))
}

/// Linearized relative acceleration in RSW plus the applied specific force.
///
/// Standard form for an arbitrary (Keplerian) target orbit:
/// ```text
/// δẍ =  (2μ/R³ + h²/R⁴) δx − 2(V·R)h/R⁴ δy + 2h/R² δẏ
/// δÿ =  (h²/R⁴ − μ/R³) δy + 2(V·R)h/R⁴ δx − 2h/R² δẋ
/// δz̈ = −μ/R³ δz
/// ```
pub fn relative_accel(
    rho: &Vector3<f64>,
    rho_dot: &Vector3<f64>,
    target: &TargetState,
    force_rsw: &Vector3<f64>,
    mass: f64,
) -> Vector3<f64> {
    let r = target.r.norm();
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r2 * r2;
    let h = target.angular_momentum();
    let mu = target.mu;
    let vr = target.v.dot(&target.r);
    let a = Vector3::new(
        (2.0 * mu / r3 + h * h / r4) * rho.x - 2.0 * vr * h / r4 * rho.y + 2.0 * h / r2 * rho_dot.y,
        (h * h / r4 - mu / r3) * rho.y + 2.0 * vr * h / r4 * rho.x - 2.0 * h / r2 * rho_dot.x,
        -mu / r3 * rho.z,
    );
    a + force_rsw / mass
}
