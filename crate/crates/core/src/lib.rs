//! Numerical laboratory for algebraic curvature operators.

pub mod error;
pub mod linalg;
pub mod rng;
pub mod tensor;
pub mod cones;
pub mod flow;
pub mod sampling;
pub mod verify;
pub mod runner;

pub use error::{Error, Result};
