//! Two-mode nonlinear canonical transformations and heterodyne multiphoton
//! squeezed states.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; file formats and the command-line front end live in the
//! `hempss` crate.

#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `Float` is only needed for its methods when `std` is not linked.
#![cfg_attr(any(feature = "std", test), allow(unused_imports))]

extern crate alloc;

pub mod canonical;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod oracle;
pub mod processes;
pub mod states;
pub mod statistics;

pub use num_complex::Complex64 as C64;

pub use canonical::{CanonicalBranch, CanonicalParams, ValidationReport};
pub use error::{Error, Result};
pub use fock::{FockCutoff, FockOperator, FockState};
pub use hamiltonian::{HamiltonianCoefficients, TransformedModes};
pub use oracle::{OracleResult, Route};
pub use states::{CubicPhaseParams, HeterodynePoint, WaveParams};
pub use statistics::{Moments, PndGrid, QuadratureConfig, Rule};

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    use core::f64::consts::TAU;
    use num_traits::Float;
    let y = x - TAU * Float::floor(x / TAU);
    if y >= TAU { 0.0 } else { y }
}

/// Distance between two angles on the circle.
pub fn angle_dist(x: f64, y: f64) -> f64 {
    use core::f64::consts::TAU;
    let d = wrap_angle(x - y);
    if d > TAU - d { TAU - d } else { d }
}
