//! Nodal force densities: the diagonal Galerkin projection of the elastic
//! stress with nodal quadrature, fiber springs, tethers and edge tractions.

use std::fmt;
use std::sync::Arc;

use super::material::{Law, Material, Tensor};
use super::mesh::{q1_shape_grad, quad_map_jacobian, Elements, LagrangianMesh, Q1_CORNERS};
use crate::error::{Error, Result};

/// Deformation gradient of quad `element` at reference point (ξ, η).
pub fn deformation_gradient(
    mesh: &LagrangianMesh,
    x: &[[f64; 2]],
    element: usize,
    xi: f64,
    eta: f64,
) -> Result<Tensor> {
    let quads = mesh.quad_elements();
    let q = quads
        .get(element)
        .ok_or_else(|| Error::InvalidMesh(format!("no quad element {element}")))?;
    let grads = reference_gradients(mesh, q, element, xi, eta)?;
    let mut f = Tensor::zeros();
    for k in 0..4 {
        let p = x[q[k]];
        for a in 0..2 {
            for b in 0..2 {
                f[(a, b)] += p[a] * grads[k][b];
            }
        }
    }
    Ok(f)
}

/// ∇_X φ_k at (ξ, η) for the four corners of `q`.
fn reference_gradients(
    mesh: &LagrangianMesh,
    q: &[usize; 4],
    element: usize,
    xi: f64,
    eta: f64,
) -> Result<[[f64; 2]; 4]> {
    let corners = q.map(|n| mesh.nodes[n]);
    let jm = quad_map_jacobian(&corners, xi, eta);
    let det = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0];
    if !(det.abs() > 0.0) {
        return Err(Error::InvalidMesh(format!("element {element} has a singular map")));
    }
    // Rows of J^{-T} applied to the reference gradient.
    let inv = [[jm[1][1] / det, -jm[0][1] / det], [-jm[1][0] / det, jm[0][0] / det]];
    let g = q1_shape_grad(xi, eta);
    let mut out = [[0.0; 2]; 4];
    for k in 0..4 {
        for b in 0..2 {
            out[k][b] = g[k][0] * inv[0][b] + g[k][1] * inv[1][b];
        }
    }
    Ok(out)
}

/// Precomputed per-element geometry for nodal quadrature.
#[derive(Debug, Clone)]
pub struct QuadCache {
    /// `grads[e][q][k]`: ∇_X φ_k at corner q of element e.
    grads: Vec<[[[f64; 2]; 4]; 4]>,
    /// ∫_e φ_q dA.
    corner_weights: Vec<[f64; 4]>,
}

impl QuadCache {
    pub fn new(mesh: &LagrangianMesh) -> Result<Self> {
        let quads = mesh.quad_elements();
        let mut grads = Vec::with_capacity(quads.len());
        let mut corner_weights = Vec::with_capacity(quads.len());
        for (e, q) in quads.iter().enumerate() {
            let mut g = [[[0.0; 2]; 4]; 4];
            for (c, xi) in Q1_CORNERS.iter().enumerate() {
                g[c] = reference_gradients(mesh, q, e, xi[0], xi[1])?;
            }
            grads.push(g);
            corner_weights.push(super::mesh::quad_corner_weights(&q.map(|n| mesh.nodes[n])));
        }
        Ok(Self { grads, corner_weights })
    }
}

/// Add the elastic force density of a solid or fiber body to `out`.
pub fn add_elastic_forces(
    mesh: &LagrangianMesh,
    cache: Option<&QuadCache>,
    mat: &Material,
    x: &[[f64; 2]],
    out: &mut [[f64; 2]],
) -> Result<()> {
    match (&mesh.elements, mat.law) {
        (Elements::Seg2(segs), Law::MembraneSpring) => {
            add_spring_forces(mesh, segs, mat.g, x, out);
            Ok(())
        }
        (Elements::Quad4(quads), Law::NeoHookean | Law::SaintVenantKirchhoff) => {
            let owned;
            let cache = match cache {
                Some(c) => c,
                None => {
                    owned = QuadCache::new(mesh)?;
                    &owned
                }
            };
            for (e, q) in quads.iter().enumerate() {
                for c in 0..4 {
                    let g = &cache.grads[e][c];
                    let mut f = Tensor::zeros();
                    for k in 0..4 {
                        let p = x[q[k]];
                        for a in 0..2 {
                            for b in 0..2 {
                                f[(a, b)] += p[a] * g[k][b];
                            }
                        }
                    }
                    let pk = mat.first_pk(&f, e)?;
                    let wq = cache.corner_weights[e][c];
                    for k in 0..4 {
                        let m = q[k];
                        let inv_w = 1.0 / mesh.weights[m];
                        for a in 0..2 {
                            out[m][a] -= inv_w * wq * (pk[(a, 0)] * g[k][0] + pk[(a, 1)] * g[k][1]);
                        }
                    }
                }
            }
            Ok(())
        }
        (Elements::Points, _) => Ok(()),
        (el, law) => Err(Error::InvalidMesh(format!(
            "material {law:?} is incompatible with {} elements",
            el.tag()
        ))),
    }
}

/// κ (χ_{l+1} − 2χ_l + χ_{l−1}) / Δs² along each segment pair, with Δs the
/// mean reference spacing of the fiber.
fn add_spring_forces(mesh: &LagrangianMesh, segs: &[[usize; 2]], kappa: f64, x: &[[f64; 2]], out: &mut [[f64; 2]]) {
    let ds = mesh.measure() / segs.len() as f64;
    let k = kappa / (ds * ds);
    for s in segs {
        let (a, b) = (s[0], s[1]);
        for c in 0..2 {
            let d = x[b][c] - x[a][c];
            out[a][c] += k * d;
            out[b][c] -= k * d;
        }
    }
}

type TargetFn = dyn Fn(usize, [f64; 2], f64) -> ([f64; 2], [f64; 2]) + Send + Sync;

/// Target position ψ and velocity V of a tethered node, given its index,
/// reference position and time.
#[derive(Clone)]
pub struct Target(Arc<TargetFn>);

impl Target {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(usize, [f64; 2], f64) -> ([f64; 2], [f64; 2]) + Send + Sync + 'static,
    {
        Target(Arc::new(f))
    }

    /// Hold each node at its reference position.
    pub fn fixed() -> Self {
        Target::new(|_, x, _| (x, [0.0, 0.0]))
    }

    pub fn eval(&self, node: usize, reference: [f64; 2], t: f64) -> ([f64; 2], [f64; 2]) {
        (self.0)(node, reference, t)
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Target(..)")
    }
}

/// Penalty force κ(ψ − χ) + η(V − U) acting on selected components of
/// selected nodes.
#[derive(Debug, Clone)]
pub struct Tether {
    pub kappa: f64,
    pub eta: f64,
    pub nodes: Vec<usize>,
    pub components: [bool; 2],
    pub target: Target,
}

impl Tether {
    pub fn new(kappa: f64, eta: f64, nodes: Vec<usize>, target: Target) -> Result<Self> {
        if !(kappa >= 0.0 && eta >= 0.0) || (kappa == 0.0 && eta == 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tether needs kappa, eta >= 0, not both zero (got {kappa}, {eta})"
            )));
        }
        Ok(Self {
            kappa,
            eta,
            nodes,
            components: [true, true],
            target,
        })
    }

    pub fn only(mut self, components: [bool; 2]) -> Self {
        self.components = components;
        self
    }

    pub fn add_forces(&self, mesh: &LagrangianMesh, x: &[[f64; 2]], u: &[[f64; 2]], t: f64, out: &mut [[f64; 2]]) {
        for &n in &self.nodes {
            let (psi, v) = self.target.eval(n, mesh.nodes[n], t);
            for c in 0..2 {
                if self.components[c] {
                    out[n][c] += self.kappa * (psi[c] - x[n][c]) + self.eta * (v[c] - u[n][c]);
                }
            }
        }
    }
}

/// Nominal traction (force per reference length) on boundary edges of a
/// solid. Consistent edge integration puts half of each edge's load on
/// each end node.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLoad {
    pub edges: Vec<[usize; 2]>,
    pub traction: [f64; 2],
}

impl EdgeLoad {
    /// Add the load scaled by `scale` (the ramp factor).
    pub fn add_forces(&self, mesh: &LagrangianMesh, scale: f64, out: &mut [[f64; 2]]) {
        for e in &self.edges {
            let len = super::mesh::dist(mesh.nodes[e[0]], mesh.nodes[e[1]]);
            for &n in e {
                let s = scale * 0.5 * len / mesh.weights[n];
                out[n][0] += s * self.traction[0];
                out[n][1] += s * self.traction[1];
            }
        }
    }

    /// Total applied force at full scale.
    pub fn total(&self, mesh: &LagrangianMesh) -> [f64; 2] {
        let len: f64 = self
            .edges
            .iter()
            .map(|e| super::mesh::dist(mesh.nodes[e[0]], mesh.nodes[e[1]]))
            .sum();
        [len * self.traction[0], len * self.traction[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skewed() -> LagrangianMesh {
        LagrangianMesh::mapped_quad([[0.0, 0.0], [2.0, 0.4], [1.8, 1.7], [-0.2, 1.1]], [3, 2]).unwrap()
    }

    #[test]
    fn affine_maps_reproduced() {
        let mesh = skewed();
        let a = Tensor::new(2.0, 0.3, -0.1, 0.5);
        let x: Vec<[f64; 2]> = mesh
            .nodes
            .iter()
            .map(|p| {
                let v = a * nalgebra::Vector2::new(p[0], p[1]);
                [v[0] + 1.0, v[1] - 3.0]
            })
            .collect();
        for e in 0..mesh.quad_elements().len() {
            for (xi, eta) in [(0.0, 0.0), (-1.0, 1.0), (0.3, -0.7)] {
                let f = deformation_gradient(&mesh, &x, e, xi, eta).unwrap();
                assert!((f - a).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn undeformed_is_force_free() {
        let mesh = skewed();
        let mut out = vec![[0.0; 2]; mesh.len()];
        let mat = Material::neo_hookean(3.0).with_stabilization(0.4);
        add_elastic_forces(&mesh, None, &mat, &mesh.nodes, &mut out).unwrap();
        assert!(out.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn tether_examples() {
        let mesh = LagrangianMesh::points(vec![[0.0, 0.0]], vec![1.0]).unwrap();
        let t = Tether::new(2.0, 0.0, vec![0], Target::fixed()).unwrap();
        let mut out = vec![[0.0; 2]];
        t.add_forces(&mesh, &[[0.1, 0.0]], &[[0.0, 0.0]], 0.0, &mut out);
        assert!((out[0][0] + 0.2).abs() < 1e-15 && out[0][1] == 0.0);

        let t = Tether::new(0.0, 3.0, vec![0], Target::fixed()).unwrap();
        let mut out = vec![[0.0; 2]];
        t.add_forces(&mesh, &[[0.0, 0.0]], &[[0.0, -1.0]], 0.0, &mut out);
        assert_eq!(out[0], [0.0, 3.0]);

        assert!(Tether::new(0.0, 0.0, vec![], Target::fixed()).is_err());
        assert!(Tether::new(-1.0, 1.0, vec![], Target::fixed()).is_err());
    }

    #[test]
    fn circle_spring_force_points_inward() {
        let r = 0.25;
        let m = 2000;
        let mesh = LagrangianMesh::circle_fiber([0.5, 0.5], r, m).unwrap();
        let mut out = vec![[0.0; 2]; m];
        add_elastic_forces(&mesh, None, &Material::membrane(1.0), &mesh.nodes, &mut out).unwrap();
        for (p, f) in mesh.nodes.iter().zip(&out) {
            let (dx, dy) = (p[0] - 0.5, p[1] - 0.5);
            let mag = f[0].hypot(f[1]);
            // |∂²X/∂s²| = 1/R on a circle of radius R.
            assert!((mag - 1.0 / r).abs() < 1e-5 / r);
            assert!(f[0] * dx + f[1] * dy < 0.0);
        }
    }

    #[test]
    fn edge_load_total() {
        let mesh = LagrangianMesh::rectangle([0.0, 0.0], [2.0, 1.0], [4, 2]).unwrap();
        let edges = mesh.boundary_edges_where(|p| p[1] > 1.0 - 1e-12);
        assert_eq!(edges.len(), 4);
        let load = EdgeLoad {
            edges,
            traction: [0.0, -3.0],
        };
        let mut out = vec![[0.0; 2]; mesh.len()];
        load.add_forces(&mesh, 0.5, &mut out);
        let total: f64 = out.iter().zip(&mesh.weights).map(|(f, w)| f[1] * w).sum();
        assert!((total + 3.0).abs() < 1e-12);
        assert_eq!(load.total(&mesh), [0.0, -6.0]);
    }
}
