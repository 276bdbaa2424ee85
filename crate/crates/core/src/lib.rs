//! Immersed finite element / finite difference fluid-structure interaction
//! in two dimensions, with isotropic and composite B-spline delta kernels.

pub mod coupling;
pub mod error;
pub mod fluid;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod lagrangian;
pub mod poisson;

pub use error::{Error, Result};
