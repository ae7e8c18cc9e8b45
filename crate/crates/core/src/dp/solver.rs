//! Backward value iteration over the channel grid.
//!
//! The sweep keeps the previous value array in `s2`-major order so that, for a fixed
//! `(j, k)`, the successor `s2` cell and weight are shared by every `i` and the `s1`
//! cell can be found with a monotone walk.

use ndarray::{Array2, Array3};
use rayon::prelude::*;

use super::grid::{inverse_spacing, locate, DpGrid};
use super::policy::PolicyTable;
use super::problem::DpProblem;
use crate::error::{Error, Result};

/// Successor states `(S1', S2')` for every grid triple, indexed `[i, j, k]`.
#[derive(Debug, Clone)]
pub struct SuccessorTable {
    pub s1p: Array3<f64>,
    pub s2p: Array3<f64>,
}

pub fn precompute_successors(problem: &DpProblem, grid: &DpGrid) -> SuccessorTable {
    let (n1, n2, p) = grid.dims();
    let mut s1p = Array3::zeros((n1, n2, p));
    let mut s2p = Array3::zeros((n1, n2, p));
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..p {
                let (a, b) = problem.successor(grid.s1[i], grid.s2[j], grid.u[k]);
                s1p[[i, j, k]] = a;
                s2p[[i, j, k]] = b;
            }
        }
    }
    SuccessorTable { s1p, s2p }
}

pub fn stage_cost(problem: &DpProblem, grid: &DpGrid) -> Array3<f64> {
    let (n1, n2, p) = grid.dims();
    Array3::from_shape_fn((n1, n2, p), |(i, j, k)| problem.stage(grid.s1[i], grid.s2[j], grid.u[k]))
}

/// Bilinear interpolation of `value` (indexed `[i, j]`) at `(x1, x2)` after clamping.
/// Blends along `s2` first, then `s1`.
pub fn interpolate(grid: &DpGrid, inv1: &[f64], inv2: &[f64], value: &Array2<f64>, x1: f64, x2: f64) -> f64 {
    let (c1, w1) = locate(&grid.s1, inv1, x1);
    let (c2, w2) = locate(&grid.s2, inv2, x2);
    let a = (1.0 - w2) * value[[c1, c2]] + w2 * value[[c1, c2 + 1]];
    let b = (1.0 - w2) * value[[c1 + 1, c2]] + w2 * value[[c1 + 1, c2 + 1]];
    (1.0 - w1) * a + w1 * b
}

/// Action indices sorted by `(|u|, index)`; first strict minimum in this order wins.
pub fn tie_break_order(u: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()).then(a.cmp(&b)));
    order
}

/// Stepwise value iteration. `value` starts at the terminal cost.
pub struct Solver {
    problem: DpProblem,
    grid: DpGrid,
    inv1: Vec<f64>,
    /// `s2`-major state cost, `[j * n1 + i]`.
    state_cost_t: Vec<f64>,
    action_cost: Vec<f64>,
    order: Vec<usize>,
    /// Per `(j, k)`: successor `s2` cell, its weight, and the `s1` shift.
    moves: Vec<(usize, f64, f64)>,
    /// `s2`-major value, `[j * n1 + i]`.
    value_t: Vec<f64>,
    index_t: Vec<u32>,
    stages_done: usize,
}

impl Solver {
    pub fn new(problem: &DpProblem) -> Result<Self> {
        problem.validate()?;
        let grid = problem.grid()?;
        let (n1, n2, p) = grid.dims();
        let inv1 = inverse_spacing(&grid.s1);
        let inv2 = inverse_spacing(&grid.s2);
        let mut state_cost_t = vec![0.0; n1 * n2];
        let mut value_t = vec![0.0; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                state_cost_t[j * n1 + i] = problem.state_cost(grid.s1[i], grid.s2[j]);
                value_t[j * n1 + i] = problem.terminal_cost(grid.s1[i], grid.s2[j]);
            }
        }
        let action_cost = grid.u.iter().map(|&u| problem.action_cost(u)).collect();
        let mut moves = Vec::with_capacity(n2 * p);
        for j in 0..n2 {
            for k in 0..p {
                let (c2, w2) = locate(&grid.s2, &inv2, problem.next_rate(grid.s2[j], grid.u[k]));
                moves.push((c2, w2, problem.shift(grid.s2[j], grid.u[k])));
            }
        }
        let order = tie_break_order(&grid.u);
        let zero = order[0] as u32;
        Ok(Self {
            problem: problem.clone(),
            inv1,
            state_cost_t,
            action_cost,
            order,
            moves,
            value_t,
            index_t: vec![zero; n1 * n2],
            stages_done: 0,
            grid,
        })
    }

    pub fn grid(&self) -> &DpGrid {
        &self.grid
    }

    pub fn stages_done(&self) -> usize {
        self.stages_done
    }

    /// Current value array indexed `[i, j]`.
    pub fn value(&self) -> Array2<f64> {
        let n1 = self.grid.s1.len();
        Array2::from_shape_fn((n1, self.grid.s2.len()), |(i, j)| self.value_t[j * n1 + i])
    }

    /// One backward Bellman sweep.
    pub fn step(&mut self) -> Result<()> {
        let (n1, _, p) = self.grid.dims();
        let prev = &self.value_t;
        let s1 = &self.grid.s1;
        let inv1 = &self.inv1;
        let (lo, hi) = (s1[0], s1[n1 - 1]);
        if let Some(at) = prev.iter().position(|v| !v.is_finite()) {
            return Err(Error::ValueNaN {
                stage: self.stages_done,
                i: at % n1,
                j: at / n1,
            });
        }
        let mut next_v = vec![0.0; prev.len()];
        let mut next_k = vec![0u32; prev.len()];
        next_v
            .par_chunks_mut(n1)
            .zip(next_k.par_chunks_mut(n1))
            .enumerate()
            .for_each(|(j, (out_v, out_k))| {
                let mut blend = vec![0.0; n1];
                out_v.fill(f64::INFINITY);
                let base = &self.state_cost_t[j * n1..(j + 1) * n1];
                for &k in &self.order {
                    let (c2, w2, shift) = self.moves[j * p + k];
                    let col0 = &prev[c2 * n1..(c2 + 1) * n1];
                    let col1 = &prev[(c2 + 1) * n1..(c2 + 2) * n1];
                    for ((b, &v0), &v1) in blend.iter_mut().zip(col0).zip(col1) {
                        *b = (1.0 - w2) * v0 + w2 * v1;
                    }
                    let ac = self.action_cost[k];
                    let mut c = 0usize;
                    for i in 0..n1 {
                        // SAFETY: i < n1 and c <= n1 - 2, so c + 1 < n1 and c < inv1.len().
                        unsafe {
                            let x = (s1.get_unchecked(i) + shift).clamp(lo, hi);
                            while c < n1 - 2 && *s1.get_unchecked(c + 1) <= x {
                                c += 1;
                            }
                            let w1 = (x - s1.get_unchecked(c)) * inv1.get_unchecked(c);
                            let v = (1.0 - w1) * blend.get_unchecked(c) + w1 * blend.get_unchecked(c + 1);
                            let cost = (base.get_unchecked(i) + ac) + v;
                            if cost < *out_v.get_unchecked(i) {
                                *out_v.get_unchecked_mut(i) = cost;
                                *out_k.get_unchecked_mut(i) = k as u32;
                            }
                        }
                    }
                }
            });
        // finite inputs give finite costs; a cell left at +inf saw only NaN candidates
        if let Some(at) = next_v.iter().position(|v| !v.is_finite()) {
            return Err(Error::ValueNaN {
                stage: self.stages_done + 1,
                i: at % n1,
                j: at / n1,
            });
        }
        self.value_t = next_v;
        self.index_t = next_k;
        self.stages_done += 1;
        Ok(())
    }

    pub fn into_policy(self) -> PolicyTable {
        let n1 = self.grid.s1.len();
        let n2 = self.grid.s2.len();
        let j_star = Array2::from_shape_fn((n1, n2), |(i, j)| self.value_t[j * n1 + i]);
        let i_star = Array2::from_shape_fn((n1, n2), |(i, j)| self.index_t[j * n1 + i]);
        PolicyTable::new(self.problem, self.grid, j_star, i_star)
    }
}

/// Runs all `problem.stages` sweeps from the terminal cost.
pub fn value_iterate(problem: &DpProblem) -> Result<PolicyTable> {
    let mut solver = Solver::new(problem)?;
    for _ in 0..problem.stages {
        solver.step()?;
    }
    Ok(solver.into_policy())
}
