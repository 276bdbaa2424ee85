//! One-dimensional kernel functions and their tensor-product assembly into
//! isotropic and composite regularized delta functions.
//!
//! Kernels are named by the number of grid points in their support:
//! `IB4` is Peskin's four-point kernel, `BS3` the quadratic B-spline, and
//! `CBS32` the composite kernel that uses `BS3` along a velocity component's
//! own axis and `BS2` along the other.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Component, GridSpec};

/// Largest support (in grid points) of any supported 1D kernel.
pub const MAX_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Peskin-style kernels built from moment and sum-of-squares conditions.
    Ib,
    /// Centered cardinal B-splines.
    Bs,
}

/// A member of one of the kernel families, e.g. `IB4` or `BS3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Kernel1D {
    family: Family,
    points: u8,
}

impl Kernel1D {
    pub fn new(family: Family, points: usize) -> Result<Self> {
        let ok = match family {
            Family::Ib => (3..=6).contains(&points),
            Family::Bs => (1..=6).contains(&points),
        };
        if !ok {
            return Err(Error::UnsupportedKernel(format!(
                "{}{points}",
                match family {
                    Family::Ib => "IB",
                    Family::Bs => "BS",
                }
            )));
        }
        Ok(Self {
            family,
            points: points as u8,
        })
    }

    pub fn ib(points: usize) -> Result<Self> {
        Self::new(Family::Ib, points)
    }

    pub fn bs(points: usize) -> Result<Self> {
        Self::new(Family::Bs, points)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn points(&self) -> usize {
        self.points as usize
    }

    /// Half of the support width, in grid units.
    pub fn half_width(&self) -> f64 {
        0.5 * self.points as f64
    }

    /// φ(r). Zero outside `[-points/2, points/2]`.
    pub fn eval(&self, r: f64) -> f64 {
        self.eval_generic(r)
    }

    /// dφ/dr. At breakpoints where φ is not differentiable the one-sided
    /// derivative from the right is returned.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        self.eval_generic(Dual::var(r)).d
    }

    /// (φ(r), dφ/dr) in one pass.
    pub fn eval_with_deriv(&self, r: f64) -> (f64, f64) {
        let d = self.eval_generic(Dual::var(r));
        (d.v, d.d)
    }

    /// Interior breakpoints of the piecewise definition, including the
    /// support endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        // Every supported kernel switches formula at -p/2 + k.
        let hw = self.half_width();
        (0..=self.points).map(|k| -hw + k as f64).collect()
    }

    fn eval_generic<S: Scalar>(&self, r: S) -> S {
        match (self.family, self.points) {
            (Family::Bs, n) => bspline(n as usize, r),
            (Family::Ib, 3) => ib3(r),
            (Family::Ib, 4) => ib4(r),
            (Family::Ib, 5) => ib5(r),
            (Family::Ib, 6) => ib6(r),
            _ => unreachable!("validated at construction"),
        }
    }
}

impl fmt::Display for Kernel1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.family {
            Family::Ib => "IB",
            Family::Bs => "BS",
        };
        write!(f, "{tag}{}", self.points)
    }
}

/// Free-function form of [`Kernel1D::eval`].
pub fn eval_kernel1d(k: Kernel1D, r: f64) -> f64 {
    k.eval(r)
}

/// Free-function form of [`Kernel1D::eval_deriv`].
pub fn eval_kernel1d_deriv(k: Kernel1D, r: f64) -> f64 {
    k.eval_deriv(r)
}

/// How the two axes of a 2D delta function are populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelMode {
    Isotropic(Kernel1D),
    /// `normal` is used along the axis of the velocity component being
    /// transferred, `tangential` along the other axis.
    Composite {
        normal: Kernel1D,
        tangential: Kernel1D,
    },
}

impl KernelMode {
    pub fn composite(normal: Kernel1D, tangential: Kernel1D) -> Result<Self> {
        if normal.family != Family::Bs || tangential.family != Family::Bs || normal.points != tangential.points + 1 {
            return Err(Error::UnsupportedKernel(format!(
                "composite kernel needs BS(n+1)/BS(n), got {normal}/{tangential}"
            )));
        }
        Ok(KernelMode::Composite { normal, tangential })
    }

    /// The (x-axis, y-axis) kernels used for velocity component `c`.
    pub fn axis_kernels(&self, c: Component) -> [Kernel1D; 2] {
        match *self {
            KernelMode::Isotropic(k) => [k, k],
            KernelMode::Composite { normal, tangential } => match c {
                Component::X => [normal, tangential],
                Component::Y => [tangential, normal],
            },
        }
    }

    pub fn max_points(&self) -> usize {
        match self {
            KernelMode::Isotropic(k) => k.points(),
            KernelMode::Composite { normal, .. } => normal.points(),
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, KernelMode::Composite { .. })
    }
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelMode::Isotropic(k) => write!(f, "{k}"),
            KernelMode::Composite { normal, tangential } => {
                write!(f, "CBS{}{}", normal.points, tangential.points)
            }
        }
    }
}

impl FromStr for KernelMode {
    type Err = Error;

    /// Grammar: `IB3..IB6`, `BS1..BS6`, `CBS21`, `CBS32`, `CBS43`, `CBS54`, `CBS65`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let bad = || Error::UnsupportedKernel(s.to_string());
        let digits = |rest: &str| -> Result<Vec<usize>> {
            if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            Ok(rest.chars().map(|c| c as usize - '0' as usize).collect())
        };
        if let Some(rest) = t.strip_prefix("CBS") {
            let d = digits(rest)?;
            if d.len() != 2 {
                return Err(bad());
            }
            KernelMode::composite(Kernel1D::bs(d[0])?, Kernel1D::bs(d[1])?)
        } else if let Some(rest) = t.strip_prefix("BS") {
            let d = digits(rest)?;
            if d.len() != 1 {
                return Err(bad());
            }
            Ok(KernelMode::Isotropic(Kernel1D::bs(d[0])?))
        } else if let Some(rest) = t.strip_prefix("IB") {
            let d = digits(rest)?;
            if d.len() != 1 {
                return Err(bad());
            }
            Ok(KernelMode::Isotropic(Kernel1D::ib(d[0])?))
        } else {
            Err(bad())
        }
    }
}

/// A regularized delta function on a grid of spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernel {
    pub mode: KernelMode,
    pub h: f64,
}

impl DeltaKernel {
    pub fn new(mode: KernelMode, h: f64) -> Self {
        Self { mode, h }
    }

    pub fn parse(s: &str, h: f64) -> Result<Self> {
        Ok(Self::new(s.parse()?, h))
    }

    /// δ_h(dx, dy) for velocity component `c`.
    pub fn eval(&self, c: Component, dx: f64, dy: f64) -> f64 {
        let [kx, ky] = self.mode.axis_kernels(c);
        kx.eval(dx / self.h) * ky.eval(dy / self.h) / (self.h * self.h)
    }
}

/// Kernel weights along one axis: grid indices `start .. start + len`.
#[derive(Debug, Clone, Copy)]
pub struct AxisStencil {
    pub start: isize,
    pub len: usize,
    pub weights: [f64; MAX_POINTS],
    /// dφ/dr at each node, r = (x_node - X)/h.
    pub derivs: [f64; MAX_POINTS],
    periodic: Option<usize>,
}

impl AxisStencil {
    /// Grid index of the `a`-th entry, wrapped on periodic axes.
    #[inline]
    pub fn index(&self, a: usize) -> isize {
        let i = self.start + a as isize;
        match self.periodic {
            Some(n) => i.rem_euclid(n as isize),
            None => i,
        }
    }

    fn build(k: Kernel1D, s: f64, with_derivs: bool, periodic: Option<usize>) -> AxisStencil {
        let p = k.points();
        let start = (s - k.half_width()).ceil() as isize;
        let mut weights = [0.0; MAX_POINTS];
        let mut derivs = [0.0; MAX_POINTS];
        for a in 0..p {
            let r = (start + a as isize) as f64 - s;
            if with_derivs {
                let (w, d) = k.eval_with_deriv(r);
                weights[a] = w;
                derivs[a] = d;
            } else {
                weights[a] = k.eval(r);
            }
        }
        AxisStencil {
            start,
            len: p,
            weights,
            derivs,
            periodic,
        }
    }
}

/// Tensor-product stencil of one velocity component at one point.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub component: Component,
    pub x: AxisStencil,
    pub y: AxisStencil,
    pub h: f64,
}

impl Stencil {
    /// Iterate over `((i, j), weight)` with weight = φ·ζ/h².
    pub fn entries(&self) -> impl Iterator<Item = ((isize, isize), f64)> + '_ {
        let inv_h2 = 1.0 / (self.h * self.h);
        (0..self.y.len).flat_map(move |b| {
            (0..self.x.len).map(move |a| {
                (
                    (self.x.index(a), self.y.index(b)),
                    self.x.weights[a] * self.y.weights[b] * inv_h2,
                )
            })
        })
    }
}

/// The faces of component `c` within kernel support of `pos`, with their
/// tensor-product weights. Fails when the stencil leaves the ghost-extended
/// grid on a non-periodic axis.
pub fn stencil(delta: &DeltaKernel, spec: &GridSpec, c: Component, pos: [f64; 2]) -> Result<Stencil> {
    build_stencil(delta, spec, c, pos, false)
}

/// Like [`stencil`] but also fills kernel derivatives.
pub fn stencil_with_derivs(delta: &DeltaKernel, spec: &GridSpec, c: Component, pos: [f64; 2]) -> Result<Stencil> {
    build_stencil(delta, spec, c, pos, true)
}

fn build_stencil(
    delta: &DeltaKernel,
    spec: &GridSpec,
    c: Component,
    pos: [f64; 2],
    with_derivs: bool,
) -> Result<Stencil> {
    if !(pos[0].is_finite() && pos[1].is_finite()) {
        return Err(Error::StencilOverflow {
            node: None,
            x: pos[0],
            y: pos[1],
        });
    }
    let kernels = delta.mode.axis_kernels(c);
    let mut axes = [None, None];
    for axis in 0..2 {
        let staggered = c.axis() == axis;
        let mut s = (pos[axis] - spec.origin[axis]) / spec.h;
        if !staggered {
            s -= 0.5;
        }
        let n = spec.cells[axis];
        let periodic = spec.is_periodic(axis).then_some(n);
        let st = AxisStencil::build(kernels[axis], s, with_derivs, periodic);
        if periodic.is_none() {
            let g = spec.ghost as isize;
            let last = if staggered { n as isize } else { n as isize - 1 };
            if st.start < -g || st.start + st.len as isize - 1 > last + g {
                return Err(Error::StencilOverflow {
                    node: None,
                    x: pos[0],
                    y: pos[1],
                });
            }
        }
        axes[axis] = Some(st);
    }
    Ok(Stencil {
        component: c,
        x: axes[0].unwrap(),
        y: axes[1].unwrap(),
        h: spec.h,
    })
}

// ---------------------------------------------------------------------------
// Scalar abstraction so each kernel formula is written once and evaluated
// either as a plain f64 or as a forward-mode dual number for derivatives.

trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn c(v: f64) -> Self;
    fn re(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }
    fn scale(self, k: f64) -> Self {
        self * Self::c(k)
    }
}

impl Scalar for f64 {
    #[inline]
    fn c(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn var(v: f64) -> Self {
        Dual { v, d: 1.0 }
    }
}

impl std::ops::Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl std::ops::Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl std::ops::Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl std::ops::Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        Dual {
            v: self.v / o.v,
            d: (self.d * o.v - self.v * o.d) / (o.v * o.v),
        }
    }
}

impl std::ops::Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Scalar for Dual {
    #[inline]
    fn c(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
    #[inline]
    fn re(self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual {
            v: s,
            d: self.d / (2.0 * s),
        }
    }
}

/// Centered cardinal B-spline with `n` points of support, evaluated with the
/// de Boor triangle on the shifted argument t = r + n/2 ∈ [0, n).
fn bspline<S: Scalar>(n: usize, r: S) -> S {
    let t = r + S::c(0.5 * n as f64);
    let tr = t.re();
    if !(0.0..n as f64).contains(&tr) {
        return S::c(0.0);
    }
    let mut b = [S::c(0.0); MAX_POINTS + 1];
    b[tr.floor() as usize] = S::c(1.0);
    for m in 2..=n {
        let inv = 1.0 / (m - 1) as f64;
        for j in 0..=(n - m) {
            let tj = t - S::c(j as f64);
            b[j] = (tj * b[j] + (S::c(m as f64) - tj) * b[j + 1]).scale(inv);
        }
    }
    b[0]
}

/// Roma, Peskin & Berger three-point kernel.
fn ib3<S: Scalar>(x: S) -> S {
    let r = x.abs();
    let rr = r.re();
    if rr < 0.5 {
        (S::c(1.0) + (S::c(1.0) - r * r.scale(3.0)).sqrt()).scale(1.0 / 3.0)
    } else if rr < 1.5 {
        let q = S::c(1.0) - r;
        (S::c(5.0) - r.scale(3.0) - (S::c(1.0) - q * q.scale(3.0)).sqrt()).scale(1.0 / 6.0)
    } else {
        S::c(0.0)
    }
}

/// Peskin's standard four-point kernel.
fn ib4<S: Scalar>(x: S) -> S {
    let r = x.abs();
    let rr = r.re();
    if rr < 1.0 {
        (S::c(3.0) - r.scale(2.0) + (S::c(1.0) + r.scale(4.0) - r * r.scale(4.0)).sqrt()).scale(0.125)
    } else if rr < 2.0 {
        (S::c(5.0) - r.scale(2.0) - (S::c(-7.0) + r.scale(12.0) - r * r.scale(4.0)).sqrt()).scale(0.125)
    } else {
        S::c(0.0)
    }
}

/// Second-moment constant of the five-point C³ kernel.
fn ib5_k() -> f64 {
    (38.0 - 69f64.sqrt()) / 60.0
}

/// Second-moment constant of the six-point C³ kernel.
fn ib6_k() -> f64 {
    59.0 / 60.0 - 29f64.sqrt() / 20.0
}

// For the five- and six-point kernels the values φ(r - k) at the support
// nodes are affine in a single free value t: φ(r - k) = a_k(r) + c_k t.
// The moment conditions fix a_k and c_k; the sum-of-squares condition gives
// a quadratic for t whose "+" root is the nonnegative, smooth branch.

const IB5_C: [f64; 5] = [1.0, -4.0, 6.0, -4.0, 1.0];
const IB6_C: [f64; 6] = [1.0, -3.0, 2.0, 2.0, -3.0, 1.0];

/// a_k(r) for k = -2..=2, r ∈ [-1/2, 1/2).
fn ib5_affine<S: Scalar>(r: S) -> [S; 5] {
    let k = ib5_k();
    let r2 = r * r;
    let r3 = r2 * r;
    [
        S::c(0.0),
        r.scale(-k / 2.0) + S::c(k / 2.0) - r3.scale(1.0 / 6.0) + r2.scale(0.5) - r.scale(1.0 / 3.0),
        r.scale(1.5 * k) - S::c(k) + r3.scale(0.5) - r2 - r.scale(0.5) + S::c(1.0),
        r.scale(-1.5 * k) + S::c(k / 2.0) - r3.scale(0.5) + r2.scale(0.5) + r,
        r * (S::c(3.0 * k) + r2 - S::c(1.0)).scale(1.0 / 6.0),
    ]
}

/// a_k(r) for k = -2..=3, r ∈ [0, 1).
fn ib6_affine<S: Scalar>(r: S) -> [S; 6] {
    let k = ib6_k();
    let r2 = r * r;
    let r3 = r2 * r;
    [
        r.scale(-k / 4.0) + S::c(k / 8.0) - r3.scale(1.0 / 12.0) + r2.scale(0.125) + r.scale(1.0 / 12.0) - S::c(0.0625),
        r.scale(k / 2.0) + r3.scale(1.0 / 6.0) - r.scale(2.0 / 3.0) + S::c(0.25),
        S::c(-k / 4.0) - r2.scale(0.25) + S::c(0.625),
        r.scale(-k / 2.0) - r3.scale(1.0 / 6.0) + r.scale(2.0 / 3.0) + S::c(0.25),
        r.scale(k / 4.0) + S::c(k / 8.0) + r3.scale(1.0 / 12.0) + r2.scale(0.125) - r.scale(1.0 / 12.0) - S::c(0.0625),
        S::c(0.0),
    ]
}

fn solve_free_value<S: Scalar, const N: usize>(a: &[S; N], c: &[f64; N], sum_sq: f64) -> S {
    let qa: f64 = c.iter().map(|x| x * x).sum();
    let mut qb = S::c(0.0);
    let mut qc = S::c(-sum_sq);
    for k in 0..N {
        qb = qb + a[k].scale(2.0 * c[k]);
        qc = qc + a[k] * a[k];
    }
    let disc = qb * qb - qc.scale(4.0 * qa);
    (-qb + disc.sqrt()).scale(0.5 / qa)
}

fn ib5<S: Scalar>(x: S) -> S {
    let ax = x.abs();
    if ax.re() >= 2.5 {
        return S::c(0.0);
    }
    // Reference state r = 1/2 has φ(5/2) = 0, which fixes the sum of squares.
    let sum_sq: f64 = ib5_affine(0.5f64).iter().map(|v| v * v).sum();
    let shift = (ax.re() + 0.5).floor();
    let r = ax - S::c(shift);
    let idx = (2.0 - shift) as usize; // k = -shift, stored at k + 2
    let a = ib5_affine(r);
    let t = solve_free_value(&a, &IB5_C, sum_sq);
    a[idx] + t.scale(IB5_C[idx])
}

fn ib6<S: Scalar>(x: S) -> S {
    let ax = x.abs();
    if ax.re() >= 3.0 {
        return S::c(0.0);
    }
    // At r = 0 the outermost value φ(-3) vanishes.
    let sum_sq: f64 = ib6_affine(0.0f64).iter().map(|v| v * v).sum();
    let shift = ax.re().floor();
    let r = ax - S::c(shift);
    let idx = (2.0 - shift) as usize;
    let a = ib6_affine(r);
    let t = solve_free_value(&a, &IB6_C, sum_sq);
    a[idx] + t.scale(IB6_C[idx])
}
