use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio between the innermost nonzero log-grid point and the half range.
pub const LOG_INNER_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// Symmetric, strictly increasing grid on `[-half_range, half_range]` with an exact 0 at the center.
///
/// Log spacing places `(n-1)/2` log-spaced points on `[half_range·1e-4, half_range]`
/// and mirrors them.
pub fn build_grid(half_range: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(half_range > 0.0) || !half_range.is_finite() {
        return Err(Error::InvalidInput(format!("grid half range {half_range} must be positive")));
    }
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "grid size {n} must be odd and at least 3 so that 0 is a grid point"
        )));
    }
    let m = (n - 1) / 2;
    let positive: Vec<f64> = match spacing {
        Spacing::Linear => (1..=m)
            .map(|k| if k == m { half_range } else { half_range * k as f64 / m as f64 })
            .collect(),
        Spacing::Log => {
            let lo = LOG_INNER_RATIO.log10();
            (0..m)
                .map(|k| {
                    if k + 1 == m {
                        half_range
                    } else {
                        let t = k as f64 / (m - 1) as f64;
                        half_range * 10f64.powf(lo * (1.0 - t))
                    }
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(n);
    out.extend(positive.iter().rev().map(|v| -v));
    out.push(0.0);
    out.extend(positive);
    Ok(out)
}

/// Linear action grid of `n` points on `±bound`, truncated to
/// `[-bound·neg_scale, bound·pos_scale]`. The grid step does not depend on the scales.
pub fn action_grid(bound: f64, n: usize, neg_scale: f64, pos_scale: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&neg_scale) || !(0.0..=1.0).contains(&pos_scale) {
        return Err(Error::InvalidInput("action scales must lie in [0, 1]".into()));
    }
    let full = build_grid(bound, n, Spacing::Linear)?;
    let slack = 1e-9 * bound;
    Ok(full
        .into_iter()
        .filter(|&u| u >= -bound * neg_scale - slack && u <= bound * pos_scale + slack)
        .collect())
}

/// Quantized states and actions of one channel problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DpGrid {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub u: Vec<f64>,
    pub spacing: Spacing,
}

impl DpGrid {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.s1.len(), self.s2.len(), self.u.len())
    }
}

/// Interpolation cell of `x` in `grid`: the largest `i ≤ n-2` with `grid[i] ≤ x`
/// after clamping `x` into the grid range, plus the weight of `grid[i+1]`.
pub fn locate(grid: &[f64], inv_spacing: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    let x = x.clamp(grid[0], grid[n - 1]);
    let i = grid.partition_point(|&g| g <= x).saturating_sub(1).min(n - 2);
    (i, (x - grid[i]) * inv_spacing[i])
}

/// `1 / (grid[i+1] - grid[i])` for each cell.
pub fn inverse_spacing(grid: &[f64]) -> Vec<f64> {
    grid.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect()
}

/// Index of the grid point nearest to `x` (lower index on exact ties); clamps outside the range.
pub fn nearest(grid: &[f64], x: f64) -> usize {
    let n = grid.len();
    let p = grid.partition_point(|&g| g < x);
    if p == 0 {
        0
    } else if p >= n {
        n - 1
    } else if (x - grid[p - 1]) <= (grid[p] - x) {
        p - 1
    } else {
        p
    }
}
