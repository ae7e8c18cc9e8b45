use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::grid::{nearest, DpGrid, Spacing};
use super::problem::DpProblem;
use crate::container::{self, ArrayData};
use crate::error::{Error, Result};

pub const POLICY_KIND: &str = "dp-policy";

/// Solved channel policy. `u_star[[i, j]] == grid.u[i_star[[i, j]]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub problem: DpProblem,
    pub grid: DpGrid,
    pub j_star: Array2<f64>,
    pub u_star: Array2<f64>,
    pub i_star: Array2<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolicyMeta {
    problem: DpProblem,
    fingerprint: String,
    spacing: Spacing,
}

impl PolicyTable {
    pub fn new(problem: DpProblem, grid: DpGrid, j_star: Array2<f64>, i_star: Array2<u32>) -> Self {
        let u_star = i_star.mapv(|k| grid.u[k as usize]);
        Self {
            problem,
            grid,
            j_star,
            u_star,
            i_star,
        }
    }

    /// Action of the nearest grid cell; states outside the grid use the boundary cell.
    pub fn lookup(&self, s1: f64, s2: f64) -> f64 {
        let (i, j) = self.cell(s1, s2);
        self.u_star[[i, j]]
    }

    pub fn cell(&self, s1: f64, s2: f64) -> (usize, usize) {
        (nearest(&self.grid.s1, s1), nearest(&self.grid.s2, s2))
    }

    /// Extent in `s1` of the contiguous zero-action band through the origin along `s2 = 0`.
    pub fn dead_zone_width(&self) -> f64 {
        let j0 = self.grid.s2.len() / 2;
        let i0 = self.grid.s1.len() / 2;
        if self.u_star[[i0, j0]] != 0.0 {
            return 0.0;
        }
        let mut lo = i0;
        while lo > 0 && self.u_star[[lo - 1, j0]] == 0.0 {
            lo -= 1;
        }
        let mut hi = i0;
        while hi + 1 < self.grid.s1.len() && self.u_star[[hi + 1, j0]] == 0.0 {
            hi += 1;
        }
        self.grid.s1[hi] - self.grid.s1[lo]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let meta = PolicyMeta {
            problem: self.problem.clone(),
            fingerprint: self.problem.fingerprint(),
            spacing: self.grid.spacing,
        };
        let (n1, n2) = self.j_star.dim();
        let arrays = vec![
            ("s1".to_string(), vec![n1], ArrayData::F64(self.grid.s1.clone())),
            ("s2".to_string(), vec![n2], ArrayData::F64(self.grid.s2.clone())),
            ("u".to_string(), vec![self.grid.u.len()], ArrayData::F64(self.grid.u.clone())),
            ("J_star".to_string(), vec![n1, n2], ArrayData::F64(self.j_star.iter().copied().collect())),
            ("I_star".to_string(), vec![n1, n2], ArrayData::U32(self.i_star.iter().copied().collect())),
        ];
        container::write(path, POLICY_KIND, &serde_json::to_value(meta)?, &arrays)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = container::read(path, POLICY_KIND)?;
        let meta: PolicyMeta = serde_json::from_value(file.meta.clone())
            .map_err(|e| Error::Format { path: path.into(), reason: format!("policy metadata: {e}") })?;
        if meta.problem.fingerprint() != meta.fingerprint {
            return Err(Error::Format { path: path.into(), reason: "problem fingerprint mismatch".into() });
        }
        let s1 = file.f64("s1", 1)?.0;
        let s2 = file.f64("s2", 1)?.0;
        let u = file.f64("u", 1)?.0;
        let (j, j_shape) = file.f64("J_star", 2)?;
        let (ik, i_shape) = file.u32("I_star", 2)?;
        let dims = (s1.len(), s2.len());
        if j_shape != [dims.0, dims.1] || i_shape != [dims.0, dims.1] {
            return Err(Error::Format { path: path.into(), reason: "array shapes disagree with grids".into() });
        }
        if ik.iter().any(|&k| k as usize >= u.len()) {
            return Err(Error::Format { path: path.into(), reason: "action index out of range".into() });
        }
        let grid = DpGrid {
            s1,
            s2,
            u,
            spacing: meta.spacing,
        };
        let j_star = Array2::from_shape_vec(dims, j).expect("shape checked");
        let i_star = Array2::from_shape_vec(dims, ik).expect("shape checked");
        Ok(Self::new(meta.problem, grid, j_star, i_star))
    }
}
