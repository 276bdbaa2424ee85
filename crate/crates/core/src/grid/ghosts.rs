use super::{Array2, Boundary, Component, GridSpec, Side, StaggeredField};

#[inline]
fn ij(axis: usize, along: isize, across: isize) -> (isize, isize) {
    if axis == 0 {
        (along, across)
    } else {
        (across, along)
    }
}

/// Range of indices across `axis`, including ghosts.
fn across_range(a: &Array2, axis: usize) -> std::ops::Range<isize> {
    let g = a.ghost() as isize;
    let n = if axis == 0 { a.ny() } else { a.nx() } as isize;
    -g..n + g
}

/// Periodic wrap along `axis`. `staggered` arrays carry a duplicate seam
/// value at index `n`, which is overwritten with the value at 0.
fn wrap(a: &mut Array2, axis: usize, n: isize, staggered: bool) {
    let g = a.ghost() as isize;
    for k in across_range(a, axis) {
        if staggered {
            for m in 0..=g {
                let v = a[ij(axis, m, k)];
                a[ij(axis, n + m, k)] = v;
            }
            for m in 1..=g {
                let v = a[ij(axis, n - m, k)];
                a[ij(axis, -m, k)] = v;
            }
        } else {
            for m in 1..=g {
                let v = a[ij(axis, n - m, k)];
                a[ij(axis, -m, k)] = v;
                let v = a[ij(axis, m - 1, k)];
                a[ij(axis, n - 1 + m, k)] = v;
            }
        }
    }
}

/// Extend face-centred data past a boundary face at index `b` (`dir`
/// points out of the domain): ghost = 2 value_b - mirror when `odd`,
/// otherwise the boundary value is copied outward.
fn reflect_staggered(a: &mut Array2, axis: usize, b: isize, dir: isize, odd: bool) {
    let g = a.ghost() as isize;
    for k in across_range(a, axis) {
        let vb = a[ij(axis, b, k)];
        for m in 1..=g {
            let mirror = a[ij(axis, b - dir * m, k)];
            a[ij(axis, b + dir * m, k)] = if odd { 2.0 * vb - mirror } else { vb };
        }
    }
}

/// Reflect cell-centred data about a boundary lying between index `first`
/// (the first interior layer) and `first + dir`. `boundary_value(k)` gives
/// the Dirichlet value at across-index k, or `None` for even reflection.
fn reflect_centered(
    a: &mut Array2,
    axis: usize,
    first: isize,
    dir: isize,
    boundary_value: impl Fn(isize) -> Option<f64>,
) {
    let g = a.ghost() as isize;
    for k in across_range(a, axis) {
        let vb = boundary_value(k);
        for m in 1..=g {
            let mirror = a[ij(axis, first - dir * (m - 1), k)];
            a[ij(axis, first + dir * m, k)] = match vb {
                Some(v) => 2.0 * v - mirror,
                None => mirror,
            };
        }
    }
}

/// Fill ghost layers of a velocity field at time `t`, x-direction first.
///
/// Normal components are reflected oddly about the boundary face value
/// (extended as a constant on traction sides); tangential components are
/// reflected so the linear interpolant hits the prescribed boundary velocity.
pub fn fill_velocity_ghosts(spec: &GridSpec, field: &mut StaggeredField, t: f64) {
    for axis in 0..2 {
        for c in Component::ALL {
            fill_component_axis(spec, field.comp_mut(c), c, axis, t);
        }
    }
}

fn fill_component_axis(spec: &GridSpec, a: &mut Array2, c: Component, axis: usize, t: f64) {
    let n = spec.cells[axis] as isize;
    let staggered = c.axis() == axis;
    if spec.is_periodic(axis) {
        wrap(a, axis, n, staggered);
        return;
    }
    for low in [true, false] {
        let side = Side::of(axis, low);
        let bc = spec.boundary(side);
        let dir = if low { -1 } else { 1 };
        if staggered {
            let b = if low { 0 } else { n };
            reflect_staggered(a, axis, b, dir, !bc.is_traction());
        } else {
            let first = if low { 0 } else { n - 1 };
            let along = if low { 0 } else { n };
            reflect_centered(a, axis, first, dir, |k| {
                // Boundary point: on the side, at the across-position of
                // this component's storage (a node along the other axis).
                let (i, j) = ij(axis, along, k);
                let p = spec.node(i, j);
                match bc {
                    Boundary::Traction { .. } => None,
                    other => other.velocity(c, t, p, spec.h),
                }
            });
        }
    }
}

/// What the pressure-like array represents, which fixes its Dirichlet
/// values on traction sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureGhosts {
    /// The pressure itself: traction sides hold the prescribed pressure.
    Pressure,
    /// A pressure increment: homogeneous on traction sides.
    Increment,
}

/// Set Dirichlet boundary faces (walls and inflow) to their values at `t`.
pub fn apply_dirichlet_faces(spec: &GridSpec, field: &mut StaggeredField, t: f64) {
    for c in Component::ALL {
        let axis = c.axis();
        if spec.is_periodic(axis) {
            continue;
        }
        let n = spec.cells[axis] as isize;
        let other = spec.cells[1 - axis] as isize;
        for low in [true, false] {
            let bc = spec.boundary(Side::of(axis, low));
            let b = if low { 0 } else { n };
            for k in 0..other {
                let (i, j) = ij(axis, b, k);
                if let Some(v) = bc.velocity(c, t, spec.face_center(c, i, j), spec.h) {
                    field.comp_mut(c)[(i, j)] = v;
                }
            }
        }
    }
}

/// Fill ghosts of a cell-centred pressure array. Sides with prescribed
/// velocity are homogeneous Neumann.
pub fn fill_pressure_ghosts(spec: &GridSpec, p: &mut Array2, kind: PressureGhosts) {
    for axis in 0..2 {
        let n = spec.cells[axis] as isize;
        if spec.is_periodic(axis) {
            wrap(p, axis, n, false);
            continue;
        }
        for low in [true, false] {
            let side = Side::of(axis, low);
            let dir = if low { -1 } else { 1 };
            let first = if low { 0 } else { n - 1 };
            let value = match (spec.boundary(side), kind) {
                (Boundary::Traction { pressure }, PressureGhosts::Pressure) => Some(*pressure),
                (Boundary::Traction { .. }, PressureGhosts::Increment) => Some(0.0),
                _ => None,
            };
            reflect_centered(p, axis, first, dir, |_| value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VelocityProfile;

    fn walls() -> GridSpec {
        GridSpec::new(
            [4, 3],
            0.25,
            [0.0, 0.0],
            2,
            [
                Boundary::Wall,
                Boundary::Traction { pressure: 2.0 },
                Boundary::Wall,
                Boundary::Inflow(VelocityProfile::new(|c, _, _, _| match c {
                    Component::X => 1.0,
                    Component::Y => 0.0,
                })),
            ],
        )
        .unwrap()
    }

    #[test]
    fn periodic_wrap_and_seam() {
        let spec = GridSpec::periodic([4, 4], 0.25, [0.0, 0.0], 2).unwrap();
        let mut f = spec.new_field();
        for (i, j) in f.u.interior().collect::<Vec<_>>() {
            f.u[(i, j)] = (i + 10 * j) as f64;
        }
        fill_velocity_ghosts(&spec, &mut f, 0.0);
        assert_eq!(f.u[(4, 1)], f.u[(0, 1)]);
        assert_eq!(f.u[(-1, 1)], f.u[(3, 1)]);
        assert_eq!(f.u[(2, -1)], f.u[(2, 3)]);
        assert_eq!(f.u[(2, 4)], f.u[(2, 0)]);
        assert_eq!(f.u[(-1, -1)], f.u[(3, 3)]);
    }

    #[test]
    fn wall_and_inflow_tangential_averages() {
        let spec = walls();
        let mut f = spec.new_field();
        for (i, j) in f.u.interior().collect::<Vec<_>>() {
            f.u[(i, j)] = 0.3 + i as f64;
        }
        fill_velocity_ghosts(&spec, &mut f, 0.0);
        // Bottom wall: average of first row and ghost is zero.
        assert_eq!(f.u[(2, -1)] + f.u[(2, 0)], 0.0);
        // Top inflow: average equals prescribed tangential velocity 1.
        assert!((0.5 * (f.u[(2, 3)] + f.u[(2, 2)]) - 1.0).abs() < 1e-15);
        // Right traction: zero-gradient extension of the normal component.
        assert_eq!(f.u[(5, 1)], f.u[(4, 1)]);
        assert_eq!(f.u[(6, 1)], f.u[(4, 1)]);
        // Left wall: odd reflection about the boundary face value.
        assert_eq!(f.u[(-1, 1)], 2.0 * f.u[(0, 1)] - f.u[(1, 1)]);
    }

    #[test]
    fn pressure_ghosts() {
        let spec = walls();
        let mut p = spec.new_cell_array();
        for (i, j) in p.interior().collect::<Vec<_>>() {
            p[(i, j)] = (i * j) as f64;
        }
        fill_pressure_ghosts(&spec, &mut p, PressureGhosts::Pressure);
        assert_eq!(p[(-1, 2)], p[(0, 2)]);
        assert_eq!(0.5 * (p[(4, 2)] + p[(3, 2)]), 2.0);
        fill_pressure_ghosts(&spec, &mut p, PressureGhosts::Increment);
        assert_eq!(p[(4, 2)], -p[(3, 2)]);
    }
}
