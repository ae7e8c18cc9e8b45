//! Scalar-last attitude quaternion.
//!
//! `q = [ê sin(θ/2), cos(θ/2)]` describes the rotation from the inertial frame
//! to the body frame. The associated direction cosine matrix maps inertial
//! components to body components as `C(q) = (q4² − |q13|²) I + 2 q13 q13ᵀ − 2 q4 [q13×]`,
//! and composition follows `C(p ⊗ q) = C(p) C(q)`.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub q13: Vector3<f64>,
    pub q4: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::identity()
    }
}

impl Quaternion {
    pub fn new(q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        Self {
            q13: Vector3::new(q1, q2, q3),
            q4,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0, 1.0)
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Self {
            q13: axis * (s / n),
            q4: c,
        }
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.q13.x, self.q13.y, self.q13.z, self.q4)
    }

    pub fn norm(&self) -> f64 {
        (self.q13.norm_squared() + self.q4 * self.q4).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            q13: self.q13 / n,
            q4: self.q4 / n,
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            q13: -self.q13,
            q4: self.q4,
        }
    }

    /// Same attitude with a non-negative scalar part.
    pub fn canonical(&self) -> Self {
        if self.q4 < 0.0 {
            Self {
                q13: -self.q13,
                q4: -self.q4,
            }
        } else {
            *self
        }
    }

    /// Composition `self ⊗ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Quaternion) -> Quaternion {
        let (p, p4) = (self.q13, self.q4);
        let (q, q4) = (other.q13, other.q4);
        Quaternion {
            q13: p4 * q + q4 * p - p.cross(&q),
            q4: p4 * q4 - p.dot(&q),
        }
    }

    /// Inertial-to-body direction cosine matrix.
    pub fn dcm_inertial_to_body(&self) -> Matrix3<f64> {
        let v = self.q13;
        let s = self.q4;
        (s * s - v.norm_squared()) * Matrix3::identity() + 2.0 * v * v.transpose()
            - 2.0 * s * v.cross_matrix()
    }

    /// Body-to-inertial direction cosine matrix `C_B^I`.
    pub fn dcm_body_to_inertial(&self) -> Matrix3<f64> {
        self.dcm_inertial_to_body().transpose()
    }

    /// Quaternion of a proper orthonormal inertial-to-body matrix (Shepperd's method).
    pub fn from_dcm_inertial_to_body(c: &Matrix3<f64>) -> Quaternion {
        // C = (q4² − v·v)I + 2vvᵀ − 2q4[v×], so C[(1,2)] − C[(2,1)] = 4 q4 v1 etc.
        let tr = c.trace();
        let candidates = [tr, c[(0, 0)], c[(1, 1)], c[(2, 2)]];
        let (k, _) = candidates
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let q = match k {
            0 => {
                let q4 = 0.5 * (1.0 + tr).sqrt();
                let f = 0.25 / q4;
                Quaternion::new(
                    (c[(1, 2)] - c[(2, 1)]) * f,
                    (c[(2, 0)] - c[(0, 2)]) * f,
                    (c[(0, 1)] - c[(1, 0)]) * f,
                    q4,
                )
            }
            1 => {
                let q1 = 0.5 * (1.0 + 2.0 * c[(0, 0)] - tr).sqrt();
                let f = 0.25 / q1;
                Quaternion::new(
                    q1,
                    (c[(0, 1)] + c[(1, 0)]) * f,
                    (c[(0, 2)] + c[(2, 0)]) * f,
                    (c[(1, 2)] - c[(2, 1)]) * f,
                )
            }
            2 => {
                let q2 = 0.5 * (1.0 + 2.0 * c[(1, 1)] - tr).sqrt();
                let f = 0.25 / q2;
                Quaternion::new(
                    (c[(0, 1)] + c[(1, 0)]) * f,
                    q2,
                    (c[(1, 2)] + c[(2, 1)]) * f,
                    (c[(2, 0)] - c[(0, 2)]) * f,
                )
            }
            _ => {
                let q3 = 0.5 * (1.0 + 2.0 * c[(2, 2)] - tr).sqrt();
                let f = 0.25 / q3;
                Quaternion::new(
                    (c[(0, 2)] + c[(2, 0)]) * f,
                    (c[(1, 2)] + c[(2, 1)]) * f,
                    q3,
                    (c[(0, 1)] - c[(1, 0)]) * f,
                )
            }
        };
        q.normalized().canonical()
    }

    /// Attitude composed from successive rotations about the body x, y and z axes.
    pub fn from_axis_sequence_xyz(angles: &Vector3<f64>) -> Quaternion {
        let qx = Quaternion::from_axis_angle(&Vector3::x(), angles.x);
        let qy = Quaternion::from_axis_angle(&Vector3::y(), angles.y);
        let qz = Quaternion::from_axis_angle(&Vector3::z(), angles.z);
        qz.compose(&qy.compose(&qx))
    }
}

/// The 4×4 kinematic matrix `Ω(ω)`.
pub fn omega_matrix(w: &Vector3<f64>) -> Matrix4<f64> {
    Matrix4::new(
        0.0, w.z, -w.y, w.x, //
        -w.z, 0.0, w.x, w.y, //
        w.y, -w.x, 0.0, w.z, //
        -w.x, -w.y, -w.z, 0.0,
    )
}

/// Quaternion time derivative `½ Ω(ω) q`, ordered `(q1, q2, q3, q4)`.
pub fn quat_rate(q: &Quaternion, omega: &Vector3<f64>) -> Vector4<f64> {
    0.5 * omega_matrix(omega) * q.as_vector()
}

/// Independent per-axis controller angles `θ_i = 2 asin(q_i)`.
///
/// The quaternion is taken with a non-negative scalar part so the angles stay
/// continuous with the body rates through ±180°.
pub fn controller_angles(q: &Quaternion) -> Result<Vector3<f64>> {
    const SLACK: f64 = 1e-9;
    let q = q.canonical();
    let mut out = Vector3::zeros();
    for i in 0..3 {
        let v = q.q13[i];
        if v.abs() > 1.0 + SLACK || !v.is_finite() {
            return Err(Error::QuaternionRange {
                component: i + 1,
                value: v,
            });
        }
        out[i] = 2.0 * v.clamp(-1.0, 1.0).asin();
    }
    Ok(out)
}
