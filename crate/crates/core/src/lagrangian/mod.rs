//! Immersed structures: reference meshes, constitutive laws, nodal force
//! densities and structural diagnostics.

mod diagnostics;
mod forces;
pub mod io;
pub mod material;
pub mod mesh;

pub use diagnostics::{element_jacobians, jacobian_error_l2, tracer_area};
pub use forces::{add_elastic_forces, deformation_gradient, EdgeLoad, QuadCache, Target, Tether};
pub use material::{kappa_stab, modified_i1, Law, Material, Tensor};
pub use mesh::{Elements, LagrangianMesh};

use crate::error::{Error, Result};

/// Current positions, velocities and force densities of a structure.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState {
    pub x: Vec<[f64; 2]>,
    pub u: Vec<[f64; 2]>,
    pub f: Vec<[f64; 2]>,
}

impl LagrangianState {
    /// At rest in the reference configuration.
    pub fn new(mesh: &LagrangianMesh) -> Self {
        let n = mesh.len();
        Self {
            x: mesh.nodes.clone(),
            u: vec![[0.0; 2]; n],
            f: vec![[0.0; 2]; n],
        }
    }

    pub fn check(&self, mesh: &LagrangianMesh) -> Result<()> {
        let n = mesh.len();
        if self.x.len() != n || self.u.len() != n || self.f.len() != n {
            return Err(Error::InvalidMesh("state length does not match the mesh".into()));
        }
        let finite = |v: &Vec<[f64; 2]>| v.iter().flatten().all(|c| c.is_finite());
        if !(finite(&self.x) && finite(&self.u) && finite(&self.f)) {
            return Err(Error::InvalidMesh("non-finite structure state".into()));
        }
        Ok(())
    }
}
