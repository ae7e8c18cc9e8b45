//! Per-channel thruster allocation by exhaustive search over quantized pair forces,
//! followed by pulse modulation into the thrust window.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{body_to_rsw, Channel, FailureMask, Quaternion, RelativeFrame, THRUSTER_COUNT};
use crate::error::{Error, Result};

/// Quantization levels on each side of zero: a 10 ms pulse step inside a 200 ms window.
pub const LEVELS: i32 = 20;
/// Thrust window length in ms.
pub const WINDOW_MS: u32 = 200;
/// Control period length in ms.
pub const PERIOD_MS: u32 = 1000;

/// One pair-force combination: levels `la, lb ∈ [-20, 20]` in units of `u_on/100`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub level_a: i32,
    pub level_b: i32,
    /// Net channel force `f_A + f_B` (N).
    pub force: f64,
    /// Channel torque divided by the lever arm, `f_A − f_B` (N).
    pub torque_per_arm: f64,
}

impl Candidate {
    pub fn fuel(&self) -> i32 {
        self.level_a.abs() + self.level_b.abs()
    }
}

/// Feasible pair-force combinations of one channel, sorted by `(fuel, level_a, level_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub channel: Channel,
    pub quantum: f64,
    pub lever_arm: f64,
    pub candidates: Vec<Candidate>,
    /// Some force or torque direction has no candidate.
    pub degenerate: bool,
}

/// Admissible levels of one pair: a positive level fires the pair's first thruster,
/// a negative level the second. Back-to-back thrusters never fire together.
fn pair_levels(pair: (usize, usize), failed: &FailureMask) -> Vec<i32> {
    (-LEVELS..=LEVELS)
        .filter(|&l| !(l > 0 && failed[pair.0]) && !(l < 0 && failed[pair.1]))
        .collect()
}

pub fn build_feasible(channel: Channel, failed: &FailureMask, u_on: f64, lever_arm: f64) -> FeasibleSet {
    let quantum = u_on * 10.0 / PERIOD_MS as f64;
    let mut candidates = Vec::new();
    for la in pair_levels(channel.pair_a(), failed) {
        for lb in pair_levels(channel.pair_b(), failed) {
            candidates.push(Candidate {
                level_a: la,
                level_b: lb,
                force: (la + lb) as f64 * quantum,
                torque_per_arm: (la - lb) as f64 * quantum,
            });
        }
    }
    candidates.sort_by_key(|c| (c.fuel(), c.level_a, c.level_b));
    let has = |f: &dyn Fn(&Candidate) -> bool| candidates.iter().any(f);
    let degenerate = !(has(&|c| c.force > 0.0)
        && has(&|c| c.force < 0.0)
        && has(&|c| c.torque_per_arm > 0.0)
        && has(&|c| c.torque_per_arm < 0.0));
    FeasibleSet {
        channel,
        quantum,
        lever_arm,
        candidates,
        degenerate,
    }
}

/// Chosen candidate for one channel together with its weighted error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub candidate: Candidate,
    pub cost: f64,
    pub force_error: f64,
    /// Torque error divided by the lever arm.
    pub torque_error: f64,
}

impl FeasibleSet {
    /// Weighted error `e_F² + W_mf·(e_M/d)²` of one candidate.
    pub fn cost(&self, c: &Candidate, force: f64, torque: f64, w_mf: f64) -> f64 {
        let ef = c.force - force;
        let em = c.torque_per_arm - torque / self.lever_arm;
        ef * ef + w_mf * em * em
    }

    /// Per-thruster average forces (N) for a candidate, zero outside this channel.
    pub fn thruster_forces(&self, c: &Candidate) -> [f64; THRUSTER_COUNT] {
        let mut u = [0.0; THRUSTER_COUNT];
        for (pair, level) in [(self.channel.pair_a(), c.level_a), (self.channel.pair_b(), c.level_b)] {
            let j = if level >= 0 { pair.0 } else { pair.1 };
            u[j] = level.unsigned_abs() as f64 * self.quantum;
        }
        u
    }
}

/// Exhaustive minimization over the channel's feasible set; the first strict minimum in
/// `(fuel, level_a, level_b)` order wins.
pub fn allocate(force: f64, torque: f64, w_mf: f64, set: &FeasibleSet) -> Result<Allocation> {
    if !force.is_finite() || !torque.is_finite() {
        return Err(Error::InvalidInput(format!("requested wrench ({force}, {torque}) is not finite")));
    }
    if !(w_mf > 0.0) || !w_mf.is_finite() {
        return Err(Error::InvalidInput(format!("W_mf = {w_mf} must be positive")));
    }
    let mut best = &set.candidates[0];
    let mut best_cost = set.cost(best, force, torque, w_mf);
    for c in &set.candidates[1..] {
        let cost = set.cost(c, force, torque, w_mf);
        if cost < best_cost {
            best = c;
            best_cost = cost;
        }
    }
    Ok(Allocation {
        candidate: *best,
        cost: best_cost,
        force_error: best.force - force,
        torque_error: best.torque_per_arm - torque / set.lever_arm,
    })
}

/// On-times in ms for the twelve thrusters, left-aligned at the start of the period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ThrusterSchedule {
    pub t_on_ms: [u32; THRUSTER_COUNT],
}

impl ThrusterSchedule {
    /// Thruster `j` is firing at `offset_ms` into the period.
    pub fn is_on(&self, j: usize, offset_ms: u32) -> bool {
        offset_ms < self.t_on_ms[j]
    }

    /// Instantaneous thrust per thruster at `offset_ms` into the period.
    pub fn thrust_at(&self, offset_ms: u32, u_on: f64) -> [f64; THRUSTER_COUNT] {
        std::array::from_fn(|j| if self.is_on(j, offset_ms) { u_on } else { 0.0 })
    }

    /// Period-averaged force per thruster.
    pub fn average_forces(&self, u_on: f64) -> [f64; THRUSTER_COUNT] {
        std::array::from_fn(|j| u_on * self.t_on_ms[j] as f64 / PERIOD_MS as f64)
    }

    pub fn total_on_ms(&self) -> u32 {
        self.t_on_ms.iter().sum()
    }
}

/// `t_on = 200·u/u_max` ms for quantized per-thruster average forces.
pub fn pulse_modulate(u_control: &[f64; THRUSTER_COUNT], u_max: f64) -> Result<ThrusterSchedule> {
    let mut t_on_ms = [0u32; THRUSTER_COUNT];
    for (j, &u) in u_control.iter().enumerate() {
        if !(0.0..=u_max * (1.0 + 1e-12)).contains(&u) {
            return Err(Error::InvalidInput(format!("thruster {} force {u} outside [0, {u_max}]", j + 1)));
        }
        let steps = u / u_max * LEVELS as f64;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "thruster {} force {u} is not a multiple of the 10 ms quantum",
                j + 1
            )));
        }
        t_on_ms[j] = rounded as u32 * (WINDOW_MS / LEVELS as u32);
    }
    Ok(ThrusterSchedule { t_on_ms })
}

/// Feasible sets for the three channels under one failure mask.
#[derive(Debug, Clone)]
pub struct Allocator {
    pub sets: [FeasibleSet; 3],
    pub failed: FailureMask,
    pub u_on: f64,
}

impl Allocator {
    pub fn new(u_on: f64, lever_arm: f64, failed: FailureMask) -> Self {
        Self {
            sets: Channel::ALL.map(|c| build_feasible(c, &failed, u_on, lever_arm)),
            failed,
            u_on,
        }
    }

    pub fn u_max(&self) -> f64 {
        u_max_from_on(self.u_on)
    }

    /// Allocates each channel independently: channel `c` serves body force `F[c]` and body
    /// torque `M[(c+1) % 3]`.
    pub fn allocate_all(
        &self,
        force: &Vector3<f64>,
        torque: &Vector3<f64>,
        w_mf: [f64; 3],
    ) -> Result<(ThrusterSchedule, [Allocation; 3])> {
        let mut u = [0.0; THRUSTER_COUNT];
        let mut out = Vec::with_capacity(3);
        for (c, set) in Channel::ALL.iter().zip(&self.sets) {
            let a = allocate(force[c.force_axis()], torque[c.torque_axis()], w_mf[c.index()], set)?;
            for (j, v) in set.thruster_forces(&a.candidate).iter().enumerate() {
                if *v > 0.0 {
                    u[j] = *v;
                }
            }
            out.push(a);
        }
        debug_assert!(u.iter().zip(&self.failed).all(|(v, &f)| !(f && *v > 0.0)));
        let schedule = pulse_modulate(&u, self.u_max())?;
        Ok((schedule, [out[0], out[1], out[2]]))
    }
}

fn u_max_from_on(u_on: f64) -> f64 {
    crate::dynamics::THRUST_WINDOW_FRACTION * u_on
}

/// Rotates a force requested in RSW into the body frame: `(C_B^R)ᵀ F`.
pub fn desired_wrench_to_body(force_rsw: &Vector3<f64>, q: &Quaternion, frame: &RelativeFrame) -> Vector3<f64> {
    body_to_rsw(q, frame).transpose() * force_rsw
}
