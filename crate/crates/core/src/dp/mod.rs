//! Grid dynamic programming for one decoupled channel: a double integrator in
//! `(s1, s2)` driven by a quantized scalar action.

pub mod grid;
pub mod policy;
pub mod problem;
pub mod solver;

pub use grid::{action_grid, build_grid, DpGrid, Spacing};
pub use policy::PolicyTable;
pub use problem::{error_transform, DpProblem, DynamicsKind, ErrorKind};
pub use solver::{precompute_successors, stage_cost, value_iterate, Solver, SuccessorTable};
