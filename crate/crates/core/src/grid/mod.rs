//! Staggered (MAC) Cartesian grid: storage with ghost layers, boundary
//! conditions, ghost filling and the discrete difference operators.

mod array;
mod ghosts;
pub mod io;
mod ops;

use std::fmt;
use std::sync::Arc;

pub use array::Array2;
pub use ghosts::{apply_dirichlet_faces, fill_pressure_ghosts, fill_velocity_ghosts, PressureGhosts};
pub use ops::{divergence, kinetic_energy, make_divfree, max_abs_divergence, momentum, pressure_gradient, vorticity};

use crate::error::{Error, Result};

/// Velocity component; `X` lives on x-faces, `Y` on y-faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    X,
    Y,
}

impl Component {
    pub const ALL: [Component; 2] = [Component::X, Component::Y];

    /// The axis along which this component is staggered.
    pub fn axis(self) -> usize {
        match self {
            Component::X => 0,
            Component::Y => 1,
        }
    }

    pub fn from_axis(axis: usize) -> Self {
        if axis == 0 {
            Component::X
        } else {
            Component::Y
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn axis(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    pub fn is_low(self) -> bool {
        matches!(self, Side::Left | Side::Bottom)
    }

    pub fn of(axis: usize, low: bool) -> Side {
        match (axis, low) {
            (0, true) => Side::Left,
            (0, false) => Side::Right,
            (_, true) => Side::Bottom,
            (_, false) => Side::Top,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

type ProfileFn = dyn Fn(Component, f64, [f64; 2], f64) -> f64 + Send + Sync;

/// Prescribed boundary velocity `(component, t, point, h) -> value`.
///
/// For faces normal to the boundary `point` is the face centre and the
/// returned value should be the face average over a face of width `h`.
#[derive(Clone)]
pub struct VelocityProfile(Arc<ProfileFn>);

impl VelocityProfile {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Component, f64, [f64; 2], f64) -> f64 + Send + Sync + 'static,
    {
        VelocityProfile(Arc::new(f))
    }

    pub fn eval(&self, c: Component, t: f64, p: [f64; 2], h: f64) -> f64 {
        (self.0)(c, t, p, h)
    }
}

impl fmt::Debug for VelocityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VelocityProfile(..)")
    }
}

#[derive(Debug, Clone)]
pub enum Boundary {
    Periodic,
    /// No-slip, no-penetration stationary wall.
    Wall,
    /// Prescribed velocity.
    Inflow(VelocityProfile),
    /// Prescribed normal traction -p n; velocity has zero normal gradient.
    Traction {
        pressure: f64,
    },
}

impl Boundary {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Boundary::Periodic)
    }

    pub fn is_traction(&self) -> bool {
        matches!(self, Boundary::Traction { .. })
    }

    /// Velocity value prescribed by a Dirichlet side, `None` otherwise.
    pub fn velocity(&self, c: Component, t: f64, p: [f64; 2], h: f64) -> Option<f64> {
        match self {
            Boundary::Wall => Some(0.0),
            Boundary::Inflow(prof) => Some(prof.eval(c, t, p, h)),
            _ => None,
        }
    }
}

/// Geometry and boundary conditions of a uniform MAC grid.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub cells: [usize; 2],
    pub h: f64,
    pub origin: [f64; 2],
    pub ghost: usize,
    bcs: [Boundary; 4],
}

impl GridSpec {
    /// `bcs` is ordered left, right, bottom, top.
    pub fn new(cells: [usize; 2], h: f64, origin: [f64; 2], ghost: usize, bcs: [Boundary; 4]) -> Result<Self> {
        if cells[0] < 2 || cells[1] < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2x2 cells, got {cells:?}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if ghost < 1 {
            return Err(Error::InvalidGrid("need at least one ghost layer".into()));
        }
        for axis in 0..2 {
            let lo = bcs[Side::of(axis, true).index()].is_periodic();
            let hi = bcs[Side::of(axis, false).index()].is_periodic();
            if lo != hi {
                return Err(Error::InvalidGrid(format!(
                    "periodic boundaries must be paired on axis {axis}"
                )));
            }
            if lo && ghost > cells[axis] {
                return Err(Error::InvalidGrid("ghost width exceeds periodic extent".into()));
            }
        }
        Ok(Self {
            cells,
            h,
            origin,
            ghost,
            bcs,
        })
    }

    /// Doubly periodic grid on `[origin, origin + n h]`.
    pub fn periodic(cells: [usize; 2], h: f64, origin: [f64; 2], ghost: usize) -> Result<Self> {
        Self::new(
            cells,
            h,
            origin,
            ghost,
            [
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Periodic,
            ],
        )
    }

    /// The same grid with all boundary data set to zero: inflow becomes
    /// a wall and traction sides carry zero pressure.
    pub fn homogeneous(&self) -> GridSpec {
        let mut s = self.clone();
        for b in s.bcs.iter_mut() {
            match b {
                Boundary::Inflow(_) => *b = Boundary::Wall,
                Boundary::Traction { pressure } => *pressure = 0.0,
                _ => {}
            }
        }
        s
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    pub fn boundary(&self, side: Side) -> &Boundary {
        &self.bcs[side.index()]
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.bcs[Side::of(axis, true).index()].is_periodic()
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.cells[axis] as f64 * self.h
    }

    /// Interior extents of the storage for component `c`.
    pub fn extents(&self, c: Component) -> [usize; 2] {
        let mut e = self.cells;
        e[c.axis()] += 1;
        e
    }

    pub fn face_center(&self, c: Component, i: isize, j: isize) -> [f64; 2] {
        let (ox, oy) = match c {
            Component::X => (0.0, 0.5),
            Component::Y => (0.5, 0.0),
        };
        [
            self.origin[0] + (i as f64 + ox) * self.h,
            self.origin[1] + (j as f64 + oy) * self.h,
        ]
    }

    pub fn cell_center(&self, i: isize, j: isize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    pub fn node(&self, i: isize, j: isize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    /// Whether face `idx` of component `c` is a degree of freedom of the
    /// momentum equation (as opposed to a Dirichlet boundary face or the
    /// duplicate copy on a periodic seam).
    pub fn is_unknown(&self, c: Component, idx: [isize; 2]) -> bool {
        let a = c.axis();
        let n = self.cells[a] as isize;
        let k = idx[a];
        if k > 0 && k < n {
            return true;
        }
        if self.is_periodic(a) {
            return k == 0;
        }
        let side = Side::of(a, k == 0);
        self.boundary(side).is_traction()
    }

    pub fn new_field(&self) -> StaggeredField {
        StaggeredField::zeros(self)
    }

    pub fn new_cell_array(&self) -> Array2 {
        Array2::new(self.cells[0], self.cells[1], self.ghost)
    }

    /// Lower and upper corners of the domain.
    pub fn domain(&self) -> ([f64; 2], [f64; 2]) {
        (
            self.origin,
            [self.origin[0] + self.length(0), self.origin[1] + self.length(1)],
        )
    }
}

/// Face-centred velocity with ghost layers.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField {
    pub u: Array2,
    pub v: Array2,
}

impl StaggeredField {
    pub fn zeros(spec: &GridSpec) -> Self {
        let eu = spec.extents(Component::X);
        let ev = spec.extents(Component::Y);
        Self {
            u: Array2::new(eu[0], eu[1], spec.ghost),
            v: Array2::new(ev[0], ev[1], spec.ghost),
        }
    }

    pub fn comp(&self, c: Component) -> &Array2 {
        match c {
            Component::X => &self.u,
            Component::Y => &self.v,
        }
    }

    pub fn comp_mut(&mut self, c: Component) -> &mut Array2 {
        match c {
            Component::X => &mut self.u,
            Component::Y => &mut self.v,
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.u.fill(value);
        self.v.fill(value);
    }

    /// Largest interior |u|, |v|.
    pub fn max_abs(&self) -> f64 {
        self.u.max_abs_interior().max(self.v.max_abs_interior())
    }

    /// self = a * x + b * y (whole storage including ghosts).
    pub fn lincomb(&mut self, a: f64, x: &StaggeredField, b: f64, y: &StaggeredField) {
        self.u.lincomb(a, &x.u, b, &y.u);
        self.v.lincomb(a, &x.v, b, &y.v);
    }

    pub fn has_non_finite(&self) -> bool {
        self.u.has_non_finite() || self.v.has_non_finite()
    }
}
