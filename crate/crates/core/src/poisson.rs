//! Cell-centred pressure Poisson solver: conjugate gradients on −L,
//! preconditioned by a symmetric multigrid V-cycle with aggregation
//! coarsening and Galerkin coarse operators.

use crate::error::{Error, Result};
use crate::grid::{Array2, Boundary, GridSpec, Side};

/// Five-point operator (A u)_p = Σ_q c_pq (u_p − u_q) + d_p u_p.
#[derive(Debug, Clone)]
struct Level {
    nx: usize,
    ny: usize,
    periodic: [bool; 2],
    /// Coupling between (i, j) and (i + 1, j), wrapping on periodic axes.
    cx: Vec<f64>,
    /// Coupling between (i, j) and (i, j + 1).
    cy: Vec<f64>,
    /// Extra diagonal from Dirichlet sides.
    d: Vec<f64>,
    diag: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    fn east(&self, i: usize) -> Option<usize> {
        if i + 1 < self.nx {
            Some(i + 1)
        } else if self.periodic[0] && self.nx > 1 {
            Some(0)
        } else {
            None
        }
    }

    #[inline]
    fn north(&self, j: usize) -> Option<usize> {
        if j + 1 < self.ny {
            Some(j + 1)
        } else if self.periodic[1] && self.ny > 1 {
            Some(0)
        } else {
            None
        }
    }

    fn finish(mut self) -> Self {
        let mut diag = self.d.clone();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = j * self.nx + i;
                if let Some(e) = self.east(i) {
                    let q = j * self.nx + e;
                    diag[p] += self.cx[p];
                    diag[q] += self.cx[p];
                }
                if let Some(n) = self.north(j) {
                    let q = n * self.nx + i;
                    diag[p] += self.cy[p];
                    diag[q] += self.cy[p];
                }
            }
        }
        self.diag = diag;
        self
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (o, (&dg, &uu)) in out.iter_mut().zip(self.diag.iter().zip(u)) {
            *o = dg * uu;
        }
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = j * self.nx + i;
                if let Some(e) = self.east(i) {
                    let q = j * self.nx + e;
                    out[p] -= self.cx[p] * u[q];
                    out[q] -= self.cx[p] * u[p];
                }
                if let Some(n) = self.north(j) {
                    let q = n * self.nx + i;
                    out[p] -= self.cy[p] * u[q];
                    out[q] -= self.cy[p] * u[p];
                }
            }
        }
    }

    /// One Gauss–Seidel sweep over cells of one colour. `reverse` visits
    /// the cells in the opposite order, which keeps the V-cycle symmetric
    /// when an odd periodic extent couples cells of equal colour.
    fn gs_colour(&self, u: &mut [f64], b: &[f64], colour: usize, reverse: bool) {
        let (nx, ny) = (self.nx, self.ny);
        let n = nx * ny;
        for q in 0..n {
            let p = if reverse { n - 1 - q } else { q };
            let (i, j) = (p % nx, p / nx);
            if (i + j) % 2 != colour {
                continue;
            }
            {
                if self.diag[p] == 0.0 {
                    continue;
                }
                let mut s = b[p];
                if let Some(e) = self.east(i) {
                    s += self.cx[p] * u[j * nx + e];
                }
                if i > 0 {
                    s += self.cx[p - 1] * u[p - 1];
                } else if self.periodic[0] && nx > 1 {
                    s += self.cx[j * nx + nx - 1] * u[j * nx + nx - 1];
                }
                if let Some(n) = self.north(j) {
                    s += self.cy[p] * u[n * nx + i];
                }
                if j > 0 {
                    s += self.cy[p - nx] * u[p - nx];
                } else if self.periodic[1] && ny > 1 {
                    s += self.cy[(ny - 1) * nx + i] * u[(ny - 1) * nx + i];
                }
                u[p] = s / self.diag[p];
            }
        }
    }

    /// Aggregate 2×2 blocks (1 at an odd end) and form PᵀAP.
    fn coarsen(&self) -> (Level, Vec<usize>) {
        let cnx = if self.nx > 1 { self.nx.div_ceil(2) } else { 1 };
        let cny = if self.ny > 1 { self.ny.div_ceil(2) } else { 1 };
        let fx = if self.nx > 1 { 2 } else { 1 };
        let fy = if self.ny > 1 { 2 } else { 1 };
        let mut agg = vec![0; self.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                agg[j * self.nx + i] = (j / fy) * cnx + i / fx;
            }
        }
        // Fine east/north neighbours land in the same aggregate or in the
        // coarse east/north neighbour, so each fine coupling either cancels
        // in PᵀAP or adds to the coarse coupling of its own aggregate.
        let mut cx = vec![0.0; cnx * cny];
        let mut cy = vec![0.0; cnx * cny];
        let mut d = vec![0.0; cnx * cny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = j * self.nx + i;
                let a = agg[p];
                d[a] += self.d[p];
                if let Some(e) = self.east(i) {
                    if agg[j * self.nx + e] != a {
                        cx[a] += self.cx[p];
                    }
                }
                if let Some(n) = self.north(j) {
                    if agg[n * self.nx + i] != a {
                        cy[a] += self.cy[p];
                    }
                }
            }
        }
        let coarse = Level {
            nx: cnx,
            ny: cny,
            periodic: self.periodic,
            cx,
            cy,
            d,
            diag: Vec::new(),
        }
        .finish();
        (coarse, agg)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= m;
    }
    m
}

/// Statistics of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Mean removed from the right-hand side of a singular problem.
    pub rhs_shift: f64,
}

/// Solver for L φ = b with homogeneous Neumann conditions on sides with
/// prescribed velocity, homogeneous Dirichlet on traction sides and
/// periodic wrap.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    levels: Vec<Level>,
    aggregates: Vec<Vec<usize>>,
    singular: bool,
    pub tol: f64,
    pub max_iter: usize,
    pre_sweeps: usize,
}

impl PoissonSolver {
    pub fn new(spec: &GridSpec) -> Self {
        let (nx, ny) = (spec.nx(), spec.ny());
        let inv_h2 = 1.0 / (spec.h * spec.h);
        let periodic = [spec.is_periodic(0), spec.is_periodic(1)];
        let dirichlet = |s: Side| matches!(spec.boundary(s), Boundary::Traction { .. });
        let mut cx = vec![inv_h2; nx * ny];
        let mut cy = vec![inv_h2; nx * ny];
        let mut d = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = j * nx + i;
                if i == nx - 1 && !periodic[0] {
                    cx[p] = 0.0;
                }
                if j == ny - 1 && !periodic[1] {
                    cy[p] = 0.0;
                }
                if i == 0 && dirichlet(Side::Left) {
                    d[p] += 2.0 * inv_h2;
                }
                if i == nx - 1 && dirichlet(Side::Right) {
                    d[p] += 2.0 * inv_h2;
                }
                if j == 0 && dirichlet(Side::Bottom) {
                    d[p] += 2.0 * inv_h2;
                }
                if j == ny - 1 && dirichlet(Side::Top) {
                    d[p] += 2.0 * inv_h2;
                }
            }
        }
        let singular = d.iter().all(|&x| x == 0.0);
        let fine = Level {
            nx,
            ny,
            periodic,
            cx,
            cy,
            d,
            diag: Vec::new(),
        }
        .finish();
        let mut levels = vec![fine];
        let mut aggregates = Vec::new();
        while levels.last().unwrap().nx.max(levels.last().unwrap().ny) > 4 {
            let (c, agg) = levels.last().unwrap().coarsen();
            levels.push(c);
            aggregates.push(agg);
        }
        Self {
            levels,
            aggregates,
            singular,
            tol: 1e-12,
            max_iter: 500,
            pre_sweeps: 2,
        }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Apply the discrete Laplacian L (not −L) to interior values.
    pub fn apply_laplacian(&self, phi: &Array2) -> Array2 {
        let l = &self.levels[0];
        let x = to_vec(phi);
        let mut y = vec![0.0; x.len()];
        l.apply(&x, &mut y);
        let mut out = Array2::new(l.nx, l.ny, phi.ghost());
        from_vec(&mut out, &y, -1.0);
        out
    }

    /// Solve L φ = b in place, using the incoming φ as initial guess. For
    /// singular problems the mean of `b` is removed first and φ is returned
    /// with zero mean.
    pub fn solve(&self, b: &Array2, phi: &mut Array2) -> Result<SolveStats> {
        let l = &self.levels[0];
        // −L φ = −b
        let mut rhs: Vec<f64> = to_vec(b).into_iter().map(|v| -v).collect();
        let shift = if self.singular { -remove_mean(&mut rhs) } else { 0.0 };
        let mut x = to_vec(phi);
        if self.singular {
            remove_mean(&mut x);
        }
        let n = l.len();
        let bnorm = dot(&rhs, &rhs).sqrt();
        if bnorm == 0.0 {
            from_vec(phi, &vec![0.0; n], 1.0);
            return Ok(SolveStats {
                iterations: 0,
                relative_residual: 0.0,
                rhs_shift: shift,
            });
        }
        let mut r = vec![0.0; n];
        l.apply(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&rhs) {
            *ri = bi - *ri;
        }
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut res = dot(&r, &r).sqrt() / bnorm;
        let mut it = 0;
        while res > self.tol && it < self.max_iter {
            l.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if self.singular {
                remove_mean(&mut r);
            }
            res = dot(&r, &r).sqrt() / bnorm;
            it += 1;
            if res <= self.tol {
                break;
            }
            self.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        if self.singular {
            remove_mean(&mut x);
        }
        from_vec(phi, &x, 1.0);
        if res > self.tol {
            return Err(Error::SolverNotConverged {
                iterations: it,
                residual: res,
            });
        }
        Ok(SolveStats {
            iterations: it,
            relative_residual: res,
            rhs_shift: shift,
        })
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        z.fill(0.0);
        self.vcycle(0, r, z);
        if self.singular {
            remove_mean(z);
        }
    }

    fn vcycle(&self, k: usize, b: &[f64], u: &mut [f64]) {
        let l = &self.levels[k];
        if k + 1 == self.levels.len() {
            coarse_solve(l, b, u, self.singular);
            return;
        }
        for _ in 0..self.pre_sweeps {
            l.gs_colour(u, b, 0, false);
            l.gs_colour(u, b, 1, false);
        }
        let mut au = vec![0.0; l.len()];
        l.apply(u, &mut au);
        let c = &self.levels[k + 1];
        let agg = &self.aggregates[k];
        let mut bc = vec![0.0; c.len()];
        for p in 0..l.len() {
            bc[agg[p]] += b[p] - au[p];
        }
        let mut uc = vec![0.0; c.len()];
        self.vcycle(k + 1, &bc, &mut uc);
        for p in 0..l.len() {
            u[p] += uc[agg[p]];
        }
        for _ in 0..self.pre_sweeps {
            l.gs_colour(u, b, 1, true);
            l.gs_colour(u, b, 0, true);
        }
    }
}

/// Plain CG to near machine precision on the coarsest level.
fn coarse_solve(l: &Level, b: &[f64], u: &mut [f64], singular: bool) {
    let n = l.len();
    let mut rhs = b.to_vec();
    if singular {
        remove_mean(&mut rhs);
    }
    u.fill(0.0);
    let bnorm = dot(&rhs, &rhs).sqrt();
    if bnorm == 0.0 {
        return;
    }
    let mut r = rhs;
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    for _ in 0..4 * n + 20 {
        l.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for k in 0..n {
            u[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if singular {
            remove_mean(&mut r);
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= 1e-15 * bnorm {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    if singular {
        remove_mean(u);
    }
}

fn to_vec(a: &Array2) -> Vec<f64> {
    a.interior().map(|(i, j)| a[(i, j)]).collect()
}

fn from_vec(a: &mut Array2, v: &[f64], scale: f64) {
    let idx: Vec<_> = a.interior().collect();
    for ((i, j), x) in idx.into_iter().zip(v) {
        a[(i, j)] = scale * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{fill_pressure_ghosts, PressureGhosts};
    use std::f64::consts::PI;

    fn spec(bcs: [Boundary; 4], n: [usize; 2]) -> GridSpec {
        GridSpec::new(n, 1.0 / n[0] as f64, [0.0, 0.0], 2, bcs).unwrap()
    }

    /// Independent five-point Laplacian through ghost filling.
    fn laplacian_via_ghosts(s: &GridSpec, phi: &Array2) -> Array2 {
        let mut q = phi.clone();
        fill_pressure_ghosts(s, &mut q, PressureGhosts::Increment);
        let mut out = s.new_cell_array();
        let h2 = s.h * s.h;
        for (i, j) in out.interior().collect::<Vec<_>>() {
            out[(i, j)] = (q[(i + 1, j)] + q[(i - 1, j)] + q[(i, j + 1)] + q[(i, j - 1)] - 4.0 * q[(i, j)]) / h2;
        }
        out
    }

    fn check(bcs: [Boundary; 4], n: [usize; 2]) {
        let s = spec(bcs, n);
        let solver = PoissonSolver::new(&s);
        let mut b = s.new_cell_array();
        for (i, j) in b.interior().collect::<Vec<_>>() {
            let c = s.cell_center(i, j);
            b[(i, j)] = (2.0 * PI * c[0]).sin() * (3.0 * c[1]).cos() + c[0] * c[1];
        }
        let mut phi = s.new_cell_array();
        let stats = solver.solve(&b, &mut phi).unwrap();
        let lap = laplacian_via_ghosts(&s, &phi);
        let lap2 = solver.apply_laplacian(&phi);
        let bmax = b.max_abs_interior();
        for (i, j) in b.interior() {
            let target = b[(i, j)] - stats.rhs_shift;
            assert!((lap[(i, j)] - target).abs() < 1e-9 * bmax, "{i} {j}");
            assert!((lap2[(i, j)] - lap[(i, j)]).abs() < 1e-9 * bmax);
        }
        assert!(stats.iterations < 60, "iterations {}", stats.iterations);
    }

    #[test]
    fn neumann_box() {
        check(
            [Boundary::Wall, Boundary::Wall, Boundary::Wall, Boundary::Wall],
            [32, 24],
        );
    }

    #[test]
    fn periodic_box_odd() {
        check(
            [
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Periodic,
            ],
            [27, 30],
        );
    }

    #[test]
    fn mixed_traction() {
        check(
            [
                Boundary::Traction { pressure: 1.0 },
                Boundary::Traction { pressure: 0.0 },
                Boundary::Wall,
                Boundary::Wall,
            ],
            [48, 13],
        );
    }

    #[test]
    fn channel_shape() {
        check(
            [
                Boundary::Wall,
                Boundary::Traction { pressure: 0.0 },
                Boundary::Wall,
                Boundary::Wall,
            ],
            [96, 16],
        );
    }
}
