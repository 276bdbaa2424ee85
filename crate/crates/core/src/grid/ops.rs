use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Array2, Component, GridSpec, StaggeredField};
use crate::error::{Error, Result};

/// Cell-centred discrete divergence of interior cells.
pub fn divergence(spec: &GridSpec, f: &StaggeredField) -> Array2 {
    let mut d = spec.new_cell_array();
    let inv_h = 1.0 / spec.h;
    for (i, j) in d.interior().collect::<Vec<_>>() {
        d[(i, j)] = (f.u[(i + 1, j)] - f.u[(i, j)] + f.v[(i, j + 1)] - f.v[(i, j)]) * inv_h;
    }
    d
}

pub fn max_abs_divergence(spec: &GridSpec, f: &StaggeredField) -> f64 {
    divergence(spec, f).max_abs_interior()
}

/// Face-centred gradient of a cell-centred array whose ghosts are filled.
pub fn pressure_gradient(spec: &GridSpec, p: &Array2) -> StaggeredField {
    let mut g = spec.new_field();
    let inv_h = 1.0 / spec.h;
    for (i, j) in g.u.interior().collect::<Vec<_>>() {
        g.u[(i, j)] = (p[(i, j)] - p[(i - 1, j)]) * inv_h;
    }
    for (i, j) in g.v.interior().collect::<Vec<_>>() {
        g.v[(i, j)] = (p[(i, j)] - p[(i, j - 1)]) * inv_h;
    }
    g
}

/// Vorticity ∂v/∂x − ∂u/∂y at grid nodes `(0..=nx, 0..=ny)`, stored in an
/// array with extents `(nx + 1, ny + 1)`. Velocity ghosts must be filled.
pub fn vorticity(spec: &GridSpec, f: &StaggeredField) -> Array2 {
    let mut w = Array2::new(spec.nx() + 1, spec.ny() + 1, 0);
    let inv_h = 1.0 / spec.h;
    for (i, j) in w.interior().collect::<Vec<_>>() {
        w[(i, j)] = (f.v[(i, j)] - f.v[(i - 1, j)]) * inv_h - (f.u[(i, j)] - f.u[(i, j - 1)]) * inv_h;
    }
    w
}

/// ½ ρ Σ |u|² h² over unknown-or-boundary faces (periodic seams counted
/// once).
pub fn kinetic_energy(spec: &GridSpec, f: &StaggeredField, rho: f64) -> f64 {
    let mut e = 0.0;
    for c in Component::ALL {
        let a = f.comp(c);
        let n_axis = spec.cells[c.axis()] as isize;
        let periodic = spec.is_periodic(c.axis());
        for (i, j) in a.interior() {
            let k = if c.axis() == 0 { i } else { j };
            if periodic && k == n_axis {
                continue;
            }
            e += a[(i, j)].powi(2);
        }
    }
    0.5 * rho * e * spec.h * spec.h
}

/// Total momentum ρ Σ u h² per component (periodic seams counted once).
pub fn momentum(spec: &GridSpec, f: &StaggeredField, rho: f64) -> [f64; 2] {
    let mut out = [0.0; 2];
    for c in Component::ALL {
        let a = f.comp(c);
        let n_axis = spec.cells[c.axis()] as isize;
        let periodic = spec.is_periodic(c.axis());
        let mut s = 0.0;
        for (i, j) in a.interior() {
            let k = if c.axis() == 0 { i } else { j };
            if periodic && k == n_axis {
                continue;
            }
            s += a[(i, j)];
        }
        out[c.axis()] = rho * s * spec.h * spec.h;
    }
    out
}

/// A random, exactly discretely divergence-free velocity field on a doubly
/// periodic grid, derived from a nodal stream function with entries in
/// `[-amplitude, amplitude]`. Ghosts are left for the caller to fill.
pub fn make_divfree(spec: &GridSpec, seed: u64, amplitude: f64) -> Result<StaggeredField> {
    if !(spec.is_periodic(0) && spec.is_periodic(1)) {
        return Err(Error::InvalidGrid(
            "random divergence-free fields need a doubly periodic grid".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = (spec.nx() as isize, spec.ny() as isize);
    let mut psi = Array2::new(spec.nx() + 1, spec.ny() + 1, 0);
    for j in 0..ny {
        for i in 0..nx {
            psi[(i, j)] = rng.random_range(-amplitude..=amplitude);
        }
    }
    for j in 0..=ny {
        psi[(nx, j)] = psi[(0, j % ny)];
    }
    for i in 0..=nx {
        psi[(i, ny)] = psi[(i % nx, 0)];
    }
    let mut f = spec.new_field();
    let inv_h = 1.0 / spec.h;
    for (i, j) in f.u.interior().collect::<Vec<_>>() {
        f.u[(i, j)] = (psi[(i, j + 1)] - psi[(i, j)]) * inv_h;
    }
    for (i, j) in f.v.interior().collect::<Vec<_>>() {
        f.v[(i, j)] = -(psi[(i + 1, j)] - psi[(i, j)]) * inv_h;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{fill_velocity_ghosts, Boundary};

    #[test]
    fn divfree_periodic_only() {
        let spec = GridSpec::periodic([8, 6], 0.125, [0.0, 0.0], 3).unwrap();
        let f = make_divfree(&spec, 7, 1.0).unwrap();
        assert!(max_abs_divergence(&spec, &f) < 1e-13 * f.max_abs() / spec.h);
        assert_eq!(f.u[(0, 2)], f.u[(8, 2)]);
        assert_eq!(f, make_divfree(&spec, 7, 1.0).unwrap());
        let zero = make_divfree(&spec, 7, 0.0).unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let walls = GridSpec::new(
            [8, 6],
            0.125,
            [0.0, 0.0],
            3,
            [Boundary::Wall, Boundary::Wall, Boundary::Wall, Boundary::Wall],
        )
        .unwrap();
        assert!(make_divfree(&walls, 7, 1.0).is_err());
    }

    #[test]
    fn linear_field_divergence() {
        let spec = GridSpec::periodic([6, 6], 0.5, [0.0, 0.0], 2).unwrap();
        let mut f = spec.new_field();
        for (i, j) in f.u.interior().collect::<Vec<_>>() {
            f.u[(i, j)] = spec.face_center(Component::X, i, j)[0];
        }
        let d = divergence(&spec, &f);
        for (i, j) in d.interior() {
            assert!((d[(i, j)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rigid_rotation_vorticity() {
        // u = -y, v = x has vorticity 2.
        let spec = GridSpec::periodic([8, 8], 0.25, [-1.0, -1.0], 2).unwrap();
        let mut f = spec.new_field();
        for (i, j) in f.u.interior().collect::<Vec<_>>() {
            f.u[(i, j)] = -spec.face_center(Component::X, i, j)[1];
        }
        for (i, j) in f.v.interior().collect::<Vec<_>>() {
            f.v[(i, j)] = spec.face_center(Component::Y, i, j)[0];
        }
        fill_velocity_ghosts(&spec, &mut f, 0.0);
        let w = vorticity(&spec, &f);
        for j in 1..8 {
            for i in 1..8 {
                assert!((w[(i, j)] - 2.0).abs() < 1e-12);
            }
        }
    }
}
