//! Twelve-thruster geometry: six back-to-back pairs, each thruster producing
//! force along one body axis and torque about another.

use nalgebra::{SMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const THRUSTER_COUNT: usize = 12;

pub type DistributionMatrix = SMatrix<f64, 3, THRUSTER_COUNT>;

/// Single-thruster failure mask, indexed by zero-based thruster number.
pub type FailureMask = [bool; THRUSTER_COUNT];

pub fn no_failures() -> FailureMask {
    [false; THRUSTER_COUNT]
}

/// Mask with thruster `number` (1-based, as in the thruster labels) failed.
pub fn single_failure(number: usize) -> Result<FailureMask> {
    if !(1..=THRUSTER_COUNT).contains(&number) {
        return Err(Error::config("failed_thruster", format!("{number} is not in 1..=12")));
    }
    let mut m = no_failures();
    m[number - 1] = true;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThrusterConfig {
    pub lever_arm: f64,
    pub h_f: DistributionMatrix,
    pub h_m: DistributionMatrix,
    pub failed: FailureMask,
}

impl ThrusterConfig {
    pub fn new(lever_arm: f64, failed: FailureMask) -> Self {
        let d = lever_arm;
        #[rustfmt::skip]
        let h_f = DistributionMatrix::from_row_slice(&[
            1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0,
        ]);
        #[rustfmt::skip]
        let h_m = DistributionMatrix::from_row_slice(&[
            0.0, 0.0, 0.0, 0.0, d, -d, 0.0, 0.0, 0.0, 0.0, -d, d,
            d, -d, 0.0, 0.0, 0.0, 0.0, -d, d, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, d, -d, 0.0, 0.0, 0.0, 0.0, -d, d, 0.0, 0.0,
        ]);
        Self {
            lever_arm,
            h_f,
            h_m,
            failed,
        }
    }

    /// Body force and torque `(H_F u, H_M u)` for per-thruster forces `u` (N).
    pub fn body_wrench(&self, u: &[f64; THRUSTER_COUNT]) -> Result<(Vector3<f64>, Vector3<f64>)> {
        for (j, &uj) in u.iter().enumerate() {
            if uj < 0.0 || !uj.is_finite() {
                return Err(Error::InvalidInput(format!("thruster {} force {uj} is negative or not finite", j + 1)));
            }
            if uj > 0.0 && self.failed[j] {
                return Err(Error::InvalidInput(format!("thruster {} is failed but commanded {uj} N", j + 1)));
            }
        }
        let u = SMatrix::<f64, THRUSTER_COUNT, 1>::from_column_slice(u);
        Ok((self.h_f * u, self.h_m * u))
    }

    /// Body force axis and sign of thruster `j` (zero-based).
    pub fn force_direction(&self, j: usize) -> (usize, f64) {
        column_direction(&self.h_f, j)
    }

    /// Body torque axis and sign of thruster `j` (zero-based).
    pub fn torque_direction(&self, j: usize) -> (usize, f64) {
        column_direction(&self.h_m, j)
    }

    /// Fraction of the nominal two-thruster capability left for force along
    /// `axis` in direction `sign`.
    pub fn force_capability(&self, axis: usize, sign: f64) -> f64 {
        capability(&self.h_f, &self.failed, axis, sign)
    }

    pub fn torque_capability(&self, axis: usize, sign: f64) -> f64 {
        capability(&self.h_m, &self.failed, axis, sign)
    }
}

fn column_direction(h: &DistributionMatrix, j: usize) -> (usize, f64) {
    let col = h.column(j);
    let axis = col.iamax();
    (axis, col[axis].signum())
}

fn capability(h: &DistributionMatrix, failed: &FailureMask, axis: usize, sign: f64) -> f64 {
    let (mut total, mut operative) = (0usize, 0usize);
    for j in 0..THRUSTER_COUNT {
        if h[(axis, j)] * sign > 0.0 {
            total += 1;
            if !failed[j] {
                operative += 1;
            }
        }
    }
    operative as f64 / total as f64
}

/// One 2-DOF channel: force along one body axis, torque about another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Z,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::X, Channel::Y, Channel::Z];

    pub fn index(self) -> usize {
        match self {
            Channel::X => 0,
            Channel::Y => 1,
            Channel::Z => 2,
        }
    }

    /// Zero-based thruster indices in the order (a, a+1, a+6, a+7), matching `H_c` columns.
    pub fn thrusters(self) -> [usize; 4] {
        let a = 2 * self.index();
        [a, a + 1, a + 6, a + 7]
    }

    pub fn force_axis(self) -> usize {
        self.index()
    }

    pub fn torque_axis(self) -> usize {
        (self.index() + 1) % 3
    }

    /// Back-to-back pair A as (positive-force thruster, negative-force thruster).
    /// Its net force `f_A` adds `+d f_A` torque.
    pub fn pair_a(self) -> (usize, usize) {
        let t = self.thrusters();
        (t[0], t[2])
    }

    /// Back-to-back pair B; net force `f_B` adds `−d f_B` torque.
    pub fn pair_b(self) -> (usize, usize) {
        let t = self.thrusters();
        (t[1], t[3])
    }

    /// The 2×4 channel distribution matrix `H_c`.
    pub fn distribution(self, lever_arm: f64) -> SMatrix<f64, 2, 4> {
        let d = lever_arm;
        SMatrix::<f64, 2, 4>::new(1.0, 1.0, -1.0, -1.0, d, -d, -d, d)
    }

    /// Channel owning thruster `j` (zero-based).
    pub fn of_thruster(j: usize) -> Channel {
        Channel::ALL[(j % 6) / 2]
    }
}
