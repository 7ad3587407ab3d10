//! Quaternionic contact geometry of hypersurfaces in flat `H^{n+1}`: induced structures,
//! qc-Einstein calibration, the parallel form `Delta` and classification into the three
//! model hyperquadrics.

// `!(x < tol)` is used on purpose: NaN must fail every tolerance gate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod conformal;
pub mod delta;
pub mod error;
pub mod frame;
pub mod linalg;
pub mod report;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
