//! Constraint-energy-minimizing generalized multiscale finite elements for
//! single- and multi-continuum nonlinear Richards equations on the unit
//! square.

pub mod error;
pub mod mesh;
pub mod model;

pub use error::{Error, Result};
pub mod assembly;
pub mod linalg;
pub mod stepping;
pub mod cem;
pub mod harness;
