use serde::{Deserialize, Serialize};

use super::grid::{action_grid, build_grid, DpGrid, Spacing};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsKind {
    /// `m·δẍ = u`
    Translation,
    /// `J_i·θ̈ = u`
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Plain,
    /// Stage cost penalizes `sin(s1 − θ_r)` so that full turns cost nothing.
    SineWrapped,
}

/// One decoupled 2-state, 1-action channel problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpProblem {
    pub dynamics: DynamicsKind,
    pub inertia: f64,
    pub s1_range: f64,
    pub s2_range: f64,
    pub n1: usize,
    pub n2: usize,
    pub spacing: Spacing,
    pub action_bound: f64,
    pub n_actions: usize,
    /// Fractions of `action_bound` available in the (negative, positive) directions.
    #[serde(default = "full_scale")]
    pub action_scale: [f64; 2],
    pub q: [[f64; 2]; 2],
    pub r: f64,
    #[serde(default)]
    pub terminal: [[f64; 2]; 2],
    pub stages: usize,
    pub dt: f64,
    pub error: ErrorKind,
    #[serde(default)]
    pub reference: f64,
}

fn full_scale() -> [f64; 2] {
    [1.0, 1.0]
}

fn is_psd(m: &[[f64; 2]; 2]) -> bool {
    m.iter().flatten().all(|v| v.is_finite())
        && m[0][1] == m[1][0]
        && m[0][0] >= 0.0
        && m[1][1] >= 0.0
        && m[0][0] * m[1][1] >= m[0][1] * m[0][1]
}

impl DpProblem {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::config(field, reason));
        if !(self.inertia > 0.0) || !self.inertia.is_finite() {
            return bad("inertia", "must be positive");
        }
        if !is_psd(&self.q) {
            return bad("q", "must be symmetric positive semidefinite");
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return bad("r", "must be positive");
        }
        if !is_psd(&self.terminal) {
            return bad("terminal", "must be symmetric positive semidefinite");
        }
        if self.stages == 0 {
            return bad("stages", "must be at least 1");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt", "must be positive");
        }
        if !(self.action_bound > 0.0) || !self.action_bound.is_finite() {
            return bad("action_bound", "must be positive");
        }
        if !self.reference.is_finite() {
            return bad("reference", "must be finite");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<DpGrid> {
        Ok(DpGrid {
            s1: build_grid(self.s1_range, self.n1, self.spacing)?,
            s2: build_grid(self.s2_range, self.n2, self.spacing)?,
            u: action_grid(self.action_bound, self.n_actions, self.action_scale[0], self.action_scale[1])?,
            spacing: self.spacing,
        })
    }

    /// Position-like displacement over one step: `s2·dt + ½(u/inertia)·dt²`.
    pub fn shift(&self, s2: f64, u: f64) -> f64 {
        let a = u / self.inertia;
        s2 * self.dt + 0.5 * a * self.dt * self.dt
    }

    pub fn next_rate(&self, s2: f64, u: f64) -> f64 {
        let a = u / self.inertia;
        s2 + a * self.dt
    }

    /// Exact one-step map of the double integrator.
    pub fn successor(&self, s1: f64, s2: f64, u: f64) -> (f64, f64) {
        (s1 + self.shift(s2, u), self.next_rate(s2, u))
    }

    pub fn error_of(&self, s1: f64) -> f64 {
        match self.error {
            ErrorKind::Plain => s1,
            ErrorKind::SineWrapped => (s1 - self.reference).sin(),
        }
    }

    pub fn state_cost(&self, s1: f64, s2: f64) -> f64 {
        let e = self.error_of(s1);
        let q = &self.q;
        q[0][0] * e * e + (q[0][1] + q[1][0]) * e * s2 + q[1][1] * s2 * s2
    }

    pub fn action_cost(&self, u: f64) -> f64 {
        self.r * u * u
    }

    pub fn stage(&self, s1: f64, s2: f64, u: f64) -> f64 {
        self.state_cost(s1, s2) + self.action_cost(u)
    }

    pub fn terminal_cost(&self, s1: f64, s2: f64) -> f64 {
        let h = &self.terminal;
        h[0][0] * s1 * s1 + (h[0][1] + h[1][0]) * s1 * s2 + h[1][1] * s2 * s2
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(self)
    }
}

/// Subtracts the reference from a channel state.
pub fn error_transform(state: (f64, f64), reference: (f64, f64)) -> (f64, f64) {
    (state.0 - reference.0, state.1 - reference.1)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn toy(dynamics: DynamicsKind) -> DpProblem {
        DpProblem {
            dynamics,
            inertia: 4.16,
            s1_range: 40.0,
            s2_range: 1.5,
            n1: 5,
            n2: 5,
            spacing: Spacing::Log,
            action_bound: 0.0416,
            n_actions: 3,
            action_scale: [1.0, 1.0],
            q: [[1.0, 0.0], [0.0, 0.0]],
            r: 0.0,
            terminal: [[0.0; 2]; 2],
            stages: 3,
            dt: 1.0,
            error: ErrorKind::Plain,
            reference: 0.0,
        }
    }

    #[test]
    fn successor_examples() {
        let p = toy(DynamicsKind::Translation);
        assert_eq!(p.successor(0.0, 0.0, 0.0), (0.0, 0.0));
        let (s1, s2) = p.successor(0.0, 0.0, 0.0416);
        assert!((s1 - 0.005).abs() < 1e-15 && (s2 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn stage_examples() {
        let mut p = toy(DynamicsKind::Translation);
        assert_eq!(p.stage(0.0, 0.0, 0.0), 0.0);
        assert_eq!(p.stage(3.0, 0.0, 0.0), 9.0);
        p.dynamics = DynamicsKind::Rotation;
        p.error = ErrorKind::SineWrapped;
        assert!(p.stage(2.0 * std::f64::consts::PI, 0.0, 0.0) < 1e-30);
        p.reference = 0.4;
        assert!(p.stage(0.4 + 2.0 * std::f64::consts::PI, 0.0, 0.0) < 1e-30);
    }

    #[test]
    fn error_transform_examples() {
        assert_eq!(error_transform((5.0, 1.0), (0.0, 0.0)), (5.0, 1.0));
        assert_eq!(error_transform((5.0, 1.0), (2.0, 0.0)), (3.0, 1.0));
    }

    #[test]
    fn validation() {
        let mut p = toy(DynamicsKind::Translation);
        assert!(p.validate().is_err(), "R = 0 is not solvable");
        p.r = 1.0;
        p.validate().unwrap();
        let mut q = p.clone();
        q.q = [[1.0, 2.0], [2.0, 1.0]];
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.q = [[1.0, 0.1], [0.0, 1.0]];
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.dt = 0.0;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.n1 = 700;
        assert!(q.grid().is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let p = toy(DynamicsKind::Translation);
        let mut q = p.clone();
        assert_eq!(p.fingerprint(), q.fingerprint());
        q.r = 2.0;
        assert_ne!(p.fingerprint(), q.fingerprint());
        let s = serde_json::to_string(&p).unwrap();
        let back: DpProblem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
