//! Force spreading from Lagrangian nodes to MAC faces, and its adjoint,
//! velocity interpolation.

use crate::error::{Error, Result};
use crate::grid::{Component, GridSpec, StaggeredField};
use crate::kernels::{stencil, stencil_with_derivs, DeltaKernel, Stencil};

#[derive(Debug, Clone)]
pub struct CouplingContext {
    pub delta: DeltaKernel,
    pub spec: GridSpec,
}

fn tag_node(e: Error, node: usize) -> Error {
    match e {
        Error::StencilOverflow { x, y, .. } => Error::StencilOverflow { node: Some(node), x, y },
        other => other,
    }
}

impl CouplingContext {
    pub fn new(delta: DeltaKernel, spec: GridSpec) -> Result<Self> {
        if (delta.h - spec.h).abs() > 1e-12 * spec.h {
            return Err(Error::InvalidGrid(format!(
                "kernel spacing {} differs from grid spacing {}",
                delta.h, spec.h
            )));
        }
        let need = delta.mode.max_points().div_ceil(2);
        if spec.ghost < need {
            return Err(Error::InvalidGrid(format!(
                "kernel {} needs {need} ghost layers, grid has {}",
                delta.mode, spec.ghost
            )));
        }
        Ok(Self { delta, spec })
    }

    fn stencil(&self, c: Component, p: [f64; 2], node: usize) -> Result<Stencil> {
        stencil(&self.delta, &self.spec, c, p).map_err(|e| tag_node(e, node))
    }

    /// Whether face `(i, j)` of component `c` is stored in the interior
    /// (ghost faces on non-periodic sides are discarded when spreading).
    fn in_domain(&self, c: Component, i: isize, j: isize) -> bool {
        let e = self.spec.extents(c);
        i >= 0 && j >= 0 && (i as usize) < e[0] && (j as usize) < e[1]
    }

    /// f += Σ_l F_l w_l δ_h(x − χ_l) on every face.
    pub fn spread(&self, weights: &[f64], x: &[[f64; 2]], forces: &[[f64; 2]], out: &mut StaggeredField) -> Result<()> {
        for c in Component::ALL {
            let a = c.axis();
            for (l, (p, f)) in x.iter().zip(forces).enumerate() {
                let s = self.stencil(c, *p, l)?;
                let fw = f[a] * weights[l];
                let arr = out.comp_mut(c);
                for ((i, j), w) in s.entries() {
                    if self.in_domain(c, i, j) {
                        arr[(i, j)] += fw * w;
                    }
                }
            }
            // Keep the duplicate seam face consistent on periodic axes.
            if self.spec.is_periodic(a) {
                let n = self.spec.cells[a] as isize;
                let other = self.spec.cells[1 - a] as isize;
                let arr = out.comp_mut(c);
                for k in 0..other {
                    let (lo, hi) = if a == 0 { ((0, k), (n, k)) } else { ((k, 0), (k, n)) };
                    arr[hi] = arr[lo];
                }
            }
        }
        Ok(())
    }

    /// U_l = Σ_faces u h² δ_h(x − χ_l). Ghosts of `field` must be filled.
    pub fn interpolate(&self, field: &StaggeredField, x: &[[f64; 2]], out: &mut [[f64; 2]]) -> Result<()> {
        for (l, p) in x.iter().enumerate() {
            out[l] = self.interpolate_at(field, *p, l)?;
        }
        Ok(())
    }

    pub fn interpolate_point(&self, field: &StaggeredField, p: [f64; 2]) -> Result<[f64; 2]> {
        self.interpolate_at(field, p, usize::MAX).map_err(|e| match e {
            Error::StencilOverflow { x, y, .. } => Error::StencilOverflow { node: None, x, y },
            other => other,
        })
    }

    fn interpolate_at(&self, field: &StaggeredField, p: [f64; 2], node: usize) -> Result<[f64; 2]> {
        let h2 = self.spec.h * self.spec.h;
        let mut u = [0.0; 2];
        for c in Component::ALL {
            let s = self.stencil(c, p, node)?;
            let arr = field.comp(c);
            let mut acc = 0.0;
            for ((i, j), w) in s.entries() {
                acc += arr[(i, j)] * w;
            }
            u[c.axis()] = acc * h2;
        }
        Ok(u)
    }

    /// ∂U/∂x + ∂V/∂y of the interpolated field at `p`, from analytic kernel
    /// derivatives.
    pub fn continuous_divergence(&self, field: &StaggeredField, p: [f64; 2]) -> Result<f64> {
        let inv_h = 1.0 / self.spec.h;
        let mut div = 0.0;
        for c in Component::ALL {
            let s = stencil_with_derivs(&self.delta, &self.spec, c, p)?;
            let arr = field.comp(c);
            let a = c.axis();
            for b in 0..s.y.len {
                for q in 0..s.x.len {
                    // d/dX φ((x_i − X)/h) = −φ'(r)/h along the component's axis.
                    let (wx, wy) = if a == 0 {
                        (s.x.derivs[q] * -inv_h, s.y.weights[b])
                    } else {
                        (s.x.weights[q], s.y.derivs[b] * -inv_h)
                    };
                    div += arr[(s.x.index(q), s.y.index(b))] * wx * wy;
                }
            }
        }
        Ok(div)
    }
}
