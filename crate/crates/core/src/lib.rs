//! Six-degree-of-freedom control of an on-off thruster spacecraft.
//!
//! Per-channel force and torque policies come from grid dynamic programming
//! over decoupled double-integrator models. At runtime the policies are queried
//! once per one-second control period, mapped to thruster on-times by an
//! exhaustive quadratic-cost allocator, and pulse-modulated into the 200 ms
//! thrust window. The simulator integrates the coupled attitude and
//! linearized relative-orbit dynamics at the 10 ms minimum pulse.

pub mod alloc;
pub mod baseline;
pub mod container;
pub mod dp;
pub mod dynamics;
pub mod error;
pub mod fault;
pub mod sim;

pub use error::{Error, Result};

use sha2::{Digest, Sha256};

/// SHA-256 of the canonical JSON form of `value`, as lowercase hex.
pub fn fingerprint<T: serde::Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration types serialize to JSON");
    container::hex(&Sha256::digest(json))
}
