//! Hyperelastic laws in plane strain. 2×2 deformation gradients are
//! embedded as diag(F, 1) when invariants are formed.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Tensor = Matrix2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    NeoHookean,
    SaintVenantKirchhoff,
    /// Closed fiber with force κ ∂²X/∂s²; `g` holds κ.
    MembraneSpring,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub law: Law,
    /// Shear modulus (μ_s for SVK) or spring constant for membranes.
    pub g: f64,
    /// First Lamé parameter, SVK only.
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub modified_invariants: bool,
    /// Numerical Poisson ratio; −1 disables the volumetric penalty.
    #[serde(default = "no_stab")]
    pub nu_stab: f64,
}

fn no_stab() -> f64 {
    -1.0
}

/// Numerical bulk modulus 2G(1+ν)/(3(1−2ν)).
pub fn kappa_stab(g: f64, nu: f64) -> f64 {
    2.0 * g * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu))
}

impl Material {
    pub fn neo_hookean(g: f64) -> Self {
        Self {
            law: Law::NeoHookean,
            g,
            lambda: 0.0,
            modified_invariants: false,
            nu_stab: -1.0,
        }
    }

    pub fn svk(mu: f64, lambda: f64) -> Self {
        Self {
            law: Law::SaintVenantKirchhoff,
            g: mu,
            lambda,
            modified_invariants: false,
            nu_stab: -1.0,
        }
    }

    pub fn membrane(kappa: f64) -> Self {
        Self {
            law: Law::MembraneSpring,
            g: kappa,
            lambda: 0.0,
            modified_invariants: false,
            nu_stab: -1.0,
        }
    }

    pub fn with_stabilization(mut self, nu: f64) -> Self {
        self.nu_stab = nu;
        self
    }

    pub fn with_modified_invariants(mut self, on: bool) -> Self {
        self.modified_invariants = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "modulus must be positive, got {}",
                self.g
            )));
        }
        if !(self.nu_stab >= -1.0 && self.nu_stab < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "nu_stab must lie in [-1, 0.5), got {}",
                self.nu_stab
            )));
        }
        if self.law == Law::SaintVenantKirchhoff && !(self.lambda >= 0.0) {
            return Err(Error::InvalidConfig("SVK lambda must be non-negative".into()));
        }
        Ok(())
    }

    pub fn is_stabilized(&self) -> bool {
        self.nu_stab > -1.0
    }

    /// κ_stab, zero when stabilization is off.
    pub fn kappa_stab(&self) -> f64 {
        if self.is_stabilized() {
            kappa_stab(self.g, self.nu_stab)
        } else {
            0.0
        }
    }

    /// First Piola–Kirchhoff stress. Fails on det F ≤ 0 with element
    /// index `element`.
    pub fn first_pk(&self, f: &Tensor, element: usize) -> Result<Tensor> {
        let j = f.determinant();
        if !(j > 0.0) {
            return Err(Error::InvertedElement { element, det: j });
        }
        let f_inv_t = f.try_inverse().expect("positive determinant").transpose();
        let mut p = match self.law {
            Law::NeoHookean if self.modified_invariants => {
                let i1 = (f.transpose() * f).trace() + 1.0;
                self.g * j.powf(-2.0 / 3.0) * (f - f_inv_t * (i1 / 3.0))
            }
            Law::NeoHookean => self.g * (f - f_inv_t),
            Law::SaintVenantKirchhoff => {
                let e = 0.5 * (f.transpose() * f - Tensor::identity());
                f * (Tensor::identity() * (self.lambda * e.trace()) + e * (2.0 * self.g))
            }
            Law::MembraneSpring => Tensor::zeros(),
        };
        if self.is_stabilized() {
            p += f_inv_t * (self.kappa_stab() * j.ln());
        }
        Ok(p)
    }

    /// Strain energy density Ψ(F) per reference area, consistent with
    /// `first_pk`. Returns +∞ for det F ≤ 0.
    pub fn energy(&self, f: &Tensor) -> f64 {
        let j = f.determinant();
        if !(j > 0.0) {
            return f64::INFINITY;
        }
        let i1 = (f.transpose() * f).trace() + 1.0;
        let mut w = match self.law {
            Law::NeoHookean if self.modified_invariants => 0.5 * self.g * (modified_i1(f) - 3.0),
            Law::NeoHookean => 0.5 * self.g * (i1 - 3.0) - self.g * j.ln(),
            Law::SaintVenantKirchhoff => {
                let e = 0.5 * (f.transpose() * f - Tensor::identity());
                0.5 * self.lambda * e.trace().powi(2) + self.g * (e * e).trace()
            }
            Law::MembraneSpring => 0.0,
        };
        if self.is_stabilized() {
            w += 0.5 * self.kappa_stab() * j.ln().powi(2);
        }
        w
    }
}

/// Ī₁ = J^{−2/3} I₁ with the plane-strain I₁ = tr(FᵀF) + 1.
pub fn modified_i1(f: &Tensor) -> f64 {
    let i1 = (f.transpose() * f).trace() + 1.0;
    f.determinant().powf(-2.0 / 3.0) * i1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_materials() -> Vec<Material> {
        let mut out = Vec::new();
        for base in [Material::neo_hookean(1.3), Material::svk(0.7, 2.1)] {
            for modified in [false, true] {
                if modified && base.law != Law::NeoHookean {
                    continue;
                }
                for nu in [-1.0, 0.4] {
                    out.push(base.with_modified_invariants(modified).with_stabilization(nu));
                }
            }
        }
        out
    }

    #[test]
    fn identity_is_stress_free() {
        for m in all_materials() {
            let p = m.first_pk(&Tensor::identity(), 0).unwrap();
            assert!(p.norm() < 1e-15, "{m:?}");
        }
    }

    #[test]
    fn simple_shear_unmodified() {
        let f = Tensor::new(1.0, 0.1, 0.0, 1.0);
        let p = Material::neo_hookean(1.0).first_pk(&f, 0).unwrap();
        let want = Tensor::new(0.0, 0.1, 0.1, 0.0);
        assert!((p - want).norm() < 1e-15);
    }

    #[test]
    fn modified_i1_isochoric() {
        let f = Tensor::new(2.0, 0.0, 0.0, 0.5);
        assert!((modified_i1(&f) - 5.25).abs() < 1e-15);
    }

    #[test]
    fn stress_matches_energy_derivative() {
        let f = Tensor::new(1.2, 0.3, -0.1, 0.9);
        for m in all_materials() {
            let p = m.first_pk(&f, 0).unwrap();
            let eps = 1e-6;
            for a in 0..2 {
                for b in 0..2 {
                    let mut fp = f;
                    let mut fm = f;
                    fp[(a, b)] += eps;
                    fm[(a, b)] -= eps;
                    let d = (m.energy(&fp) - m.energy(&fm)) / (2.0 * eps);
                    assert!((d - p[(a, b)]).abs() < 1e-7 * (1.0 + p.norm()), "{m:?}");
                }
            }
        }
    }

    #[test]
    fn benchmark_bulk_moduli() {
        assert!((kappa_stab(80.194, 0.4) - 374.239).abs() < 5e-4);
        // The printed G = 83.333 is itself rounded from 250/3; the printed
        // bulk modulus carries that rounding.
        assert!((kappa_stab(250.0 / 3.0, 0.4) - 388.889).abs() < 5e-4);
        assert!((kappa_stab(83.333, 0.4) - 388.889).abs() < 5e-4 + 4.67 * 0.0005);
        assert_eq!(Material::neo_hookean(1.0).kappa_stab(), 0.0);
    }

    #[test]
    fn inverted_is_error() {
        let f = Tensor::new(-1.0, 0.0, 0.0, 1.0);
        match Material::neo_hookean(1.0).first_pk(&f, 17) {
            Err(Error::InvertedElement { element, .. }) => assert_eq!(element, 17),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation() {
        assert!(Material::neo_hookean(0.0).validate().is_err());
        assert!(Material::neo_hookean(1.0).with_stabilization(0.5).validate().is_err());
        assert!(Material::neo_hookean(1.0).with_stabilization(0.49).validate().is_ok());
    }
}
