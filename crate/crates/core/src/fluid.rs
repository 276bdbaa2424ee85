//! Incompressible Navier–Stokes on the MAC grid: second-order
//! Adams–Bashforth advection in conservative form, explicit or
//! Crank–Nicolson viscosity, and an incremental pressure projection.

use crate::error::{Error, Result};
use crate::grid::{
    apply_dirichlet_faces, divergence, fill_pressure_ghosts, fill_velocity_ghosts, Array2, Component, GridSpec,
    PressureGhosts, StaggeredField,
};
use crate::poisson::PoissonSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscousScheme {
    Explicit,
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub rho: f64,
    pub mu: f64,
    pub viscous: ViscousScheme,
    /// Largest admissible |u| dt / h.
    pub cfl_safety: f64,
    /// Drop the advective term (Stokes flow).
    pub stokes: bool,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            mu: 0.01,
            viscous: ViscousScheme::Explicit,
            cfl_safety: 0.5,
            stokes: false,
        }
    }
}

/// Velocity, pressure and the history needed by the multistep scheme.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub u: StaggeredField,
    pub p: Array2,
    pub t: f64,
    prev_advection: Option<(StaggeredField, f64)>,
}

impl FluidState {
    pub fn new(spec: &GridSpec) -> Self {
        Self {
            u: spec.new_field(),
            p: spec.new_cell_array(),
            t: 0.0,
            prev_advection: None,
        }
    }

    pub fn from_velocity(spec: &GridSpec, u: StaggeredField, t: f64) -> Self {
        let mut s = Self::new(spec);
        s.u = u;
        s.t = t;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub poisson_iterations: usize,
    pub viscous_iterations: usize,
    pub max_divergence: f64,
    pub cfl: f64,
}

pub struct FluidSolver {
    pub spec: GridSpec,
    homogeneous: GridSpec,
    pub params: FluidParams,
    poisson: PoissonSolver,
}

impl FluidSolver {
    pub fn new(spec: GridSpec, params: FluidParams) -> Result<Self> {
        if !(params.rho > 0.0) || !(params.mu >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need rho > 0 and mu >= 0, got rho = {}, mu = {}",
                params.rho, params.mu
            )));
        }
        let poisson = PoissonSolver::new(&spec);
        Ok(Self {
            homogeneous: spec.homogeneous(),
            spec,
            params,
            poisson,
        })
    }

    /// Largest stable step of the fully explicit scheme: the advective CFL
    /// limit and the diffusive limit. `+inf` when neither applies.
    pub fn stable_dt(&self, u: &StaggeredField) -> f64 {
        let h = self.spec.h;
        let umax = u.max_abs();
        let mut dt = f64::INFINITY;
        if umax > 0.0 {
            dt = dt.min(self.params.cfl_safety * h / umax);
        }
        if self.params.mu > 0.0 {
            dt = dt.min(0.25 * self.params.rho * h * h / self.params.mu);
        }
        dt
    }

    /// Advance from `state.t` to `state.t + dt` under the body force `f`
    /// (force per unit area on faces).
    pub fn step(&self, state: &mut FluidState, f: &StaggeredField, dt: f64) -> Result<StepStats> {
        let spec = &self.spec;
        let FluidParams { rho, mu, .. } = self.params;
        let h = spec.h;
        let t0 = state.t;
        let t1 = t0 + dt;

        let cfl = state.u.max_abs() * dt / h;
        if cfl > self.params.cfl_safety || !cfl.is_finite() {
            return Err(Error::StepRejected {
                cfl,
                limit: self.params.cfl_safety,
                dt,
            });
        }

        fill_velocity_ghosts(spec, &mut state.u, t0);
        fill_pressure_ghosts(spec, &mut state.p, PressureGhosts::Pressure);

        // Advection with variable-step AB2 extrapolation.
        let mut adv = spec.new_field();
        if !self.params.stokes {
            let n_now = advection(spec, &state.u);
            match &state.prev_advection {
                Some((n_old, dt_old)) => {
                    let w = 0.5 * dt / dt_old;
                    adv.lincomb(1.0 + w, &n_now, -w, n_old);
                }
                None => adv = n_now.clone(),
            }
            state.prev_advection = Some((n_now, dt));
        }

        let lap_old = laplacian(spec, &state.u);
        let grad_p = gradient(spec, &state.p);

        // ũ: old velocity with boundary data advanced to t1.
        let mut u_tilde = state.u.clone();
        apply_dirichlet_faces(spec, &mut u_tilde, t1);
        fill_velocity_ghosts(spec, &mut u_tilde, t1);

        let mut ustar = u_tilde.clone();
        match self.params.viscous {
            ViscousScheme::Explicit => {
                for_unknown(spec, |c, i, j| {
                    let rhs = -rho * adv.comp(c)[(i, j)] - grad_p.comp(c)[(i, j)]
                        + mu * lap_old.comp(c)[(i, j)]
                        + f.comp(c)[(i, j)];
                    ustar.comp_mut(c)[(i, j)] = state.u.comp(c)[(i, j)] + dt / rho * rhs;
                });
            }
            ViscousScheme::CrankNicolson => {
                let lap_tilde = laplacian(spec, &u_tilde);
                let mut b = spec.new_field();
                for_unknown(spec, |c, i, j| {
                    let rhs = -rho * adv.comp(c)[(i, j)] - grad_p.comp(c)[(i, j)]
                        + 0.5 * mu * (lap_old.comp(c)[(i, j)] + lap_tilde.comp(c)[(i, j)])
                        + f.comp(c)[(i, j)];
                    b.comp_mut(c)[(i, j)] = dt / rho * rhs;
                });
                let a = 0.5 * dt * mu / rho;
                let (delta, iters) = self.solve_helmholtz(&b, a)?;
                for_unknown(spec, |c, i, j| {
                    ustar.comp_mut(c)[(i, j)] = u_tilde.comp(c)[(i, j)] + delta.comp(c)[(i, j)];
                });
                return self.project(state, ustar, dt, cfl, iters);
            }
        }
        self.project(state, ustar, dt, cfl, 0)
    }

    fn project(
        &self,
        state: &mut FluidState,
        mut ustar: StaggeredField,
        dt: f64,
        cfl: f64,
        viscous_iterations: usize,
    ) -> Result<StepStats> {
        let spec = &self.spec;
        let rho = self.params.rho;
        let t1 = state.t + dt;
        fill_velocity_ghosts(spec, &mut ustar, t1);
        let mut rhs = divergence(spec, &ustar);
        for v in rhs.as_mut_slice() {
            *v *= rho / dt;
        }
        let mut phi = spec.new_cell_array();
        let stats = self.poisson.solve(&rhs, &mut phi)?;
        fill_pressure_ghosts(spec, &mut phi, PressureGhosts::Increment);
        let gphi = gradient(spec, &phi);
        for_unknown(spec, |c, i, j| {
            ustar.comp_mut(c)[(i, j)] -= dt / rho * gphi.comp(c)[(i, j)];
        });
        for (i, j) in phi.interior().collect::<Vec<_>>() {
            state.p[(i, j)] += phi[(i, j)];
        }
        fill_velocity_ghosts(spec, &mut ustar, t1);
        state.u = ustar;
        state.t = t1;
        if state.u.has_non_finite() {
            return Err(Error::RunFailed {
                t: t1,
                reason: "non-finite fluid velocity".into(),
            });
        }
        let max_divergence = divergence(spec, &state.u).max_abs_interior();
        Ok(StepStats {
            poisson_iterations: stats.iterations,
            viscous_iterations,
            max_divergence,
            cfl,
        })
    }

    /// Solve (I − a L₀) δ = b on unknown faces, with L₀ the velocity
    /// Laplacian under homogeneous boundary data, by diagonally scaled CG.
    fn solve_helmholtz(&self, b: &StaggeredField, a: f64) -> Result<(StaggeredField, usize)> {
        let spec = &self.spec;
        let hs = &self.homogeneous;
        let apply = |x: &StaggeredField| -> StaggeredField {
            let mut y = x.clone();
            zero_known(spec, &mut y);
            fill_velocity_ghosts(hs, &mut y, 0.0);
            let l = laplacian(spec, &y);
            let mut out = spec.new_field();
            for_unknown(spec, |c, i, j| {
                out.comp_mut(c)[(i, j)] = y.comp(c)[(i, j)] - a * l.comp(c)[(i, j)];
            });
            out
        };
        let dot = |x: &StaggeredField, y: &StaggeredField| {
            let mut s = 0.0;
            for_unknown(spec, |c, i, j| s += x.comp(c)[(i, j)] * y.comp(c)[(i, j)]);
            s
        };
        let inv_diag = 1.0 / (1.0 + 4.0 * a / (spec.h * spec.h));
        let mut x = spec.new_field();
        let mut r = b.clone();
        zero_known(spec, &mut r);
        let bnorm = dot(&r, &r).sqrt();
        if bnorm == 0.0 {
            return Ok((x, 0));
        }
        let mut z = r.clone();
        scale(&mut z, inv_diag);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let tol = 1e-12;
        for it in 1..=1000 {
            let ap = apply(&p);
            let alpha = rz / dot(&p, &ap);
            let xc = x.clone();
            x.lincomb(1.0, &xc, alpha, &p);
            let rc = r.clone();
            r.lincomb(1.0, &rc, -alpha, &ap);
            let res = dot(&r, &r).sqrt() / bnorm;
            if res < tol {
                zero_known(spec, &mut x);
                return Ok((x, it));
            }
            z = r.clone();
            scale(&mut z, inv_diag);
            let rz_new = dot(&r, &z);
            let pc = p.clone();
            p.lincomb(1.0, &z, rz_new / rz, &pc);
            rz = rz_new;
        }
        Err(Error::SolverNotConverged {
            iterations: 1000,
            residual: dot(&r, &r).sqrt() / bnorm,
        })
    }
}

fn scale(f: &mut StaggeredField, s: f64) {
    for v in f.u.as_mut_slice().iter_mut().chain(f.v.as_mut_slice()) {
        *v *= s;
    }
}

/// Zero every face that is not a degree of freedom.
fn zero_known(spec: &GridSpec, f: &mut StaggeredField) {
    for c in Component::ALL {
        let a = f.comp_mut(c);
        for (i, j) in a.interior().collect::<Vec<_>>() {
            if !spec.is_unknown(c, [i, j]) {
                a[(i, j)] = 0.0;
            }
        }
    }
}

/// Visit every unknown face.
pub fn for_unknown(spec: &GridSpec, mut f: impl FnMut(Component, isize, isize)) {
    for c in Component::ALL {
        let e = spec.extents(c);
        for j in 0..e[1] as isize {
            for i in 0..e[0] as isize {
                if spec.is_unknown(c, [i, j]) {
                    f(c, i, j);
                }
            }
        }
    }
}

/// Five-point Laplacian of each component at interior storage points.
/// Ghosts must be filled.
pub fn laplacian(spec: &GridSpec, u: &StaggeredField) -> StaggeredField {
    let mut out = spec.new_field();
    let inv_h2 = 1.0 / (spec.h * spec.h);
    for c in Component::ALL {
        let a = u.comp(c);
        let o = out.comp_mut(c);
        for (i, j) in a.interior().collect::<Vec<_>>() {
            o[(i, j)] = (a[(i + 1, j)] + a[(i - 1, j)] + a[(i, j + 1)] + a[(i, j - 1)] - 4.0 * a[(i, j)]) * inv_h2;
        }
    }
    out
}

/// Face gradient of a cell-centred array with filled ghosts.
fn gradient(spec: &GridSpec, p: &Array2) -> StaggeredField {
    crate::grid::pressure_gradient(spec, p)
}

/// Conservative centred advection ∇·(u ⊗ u) at interior storage points.
/// Ghosts must be filled.
pub fn advection(spec: &GridSpec, f: &StaggeredField) -> StaggeredField {
    let mut out = spec.new_field();
    let inv_h = 1.0 / spec.h;
    let (u, v) = (&f.u, &f.v);
    for (i, j) in u.interior().collect::<Vec<_>>() {
        let ue = 0.5 * (u[(i, j)] + u[(i + 1, j)]);
        let uw = 0.5 * (u[(i - 1, j)] + u[(i, j)]);
        let un = 0.5 * (u[(i, j)] + u[(i, j + 1)]);
        let us = 0.5 * (u[(i, j - 1)] + u[(i, j)]);
        let vn = 0.5 * (v[(i - 1, j + 1)] + v[(i, j + 1)]);
        let vs = 0.5 * (v[(i - 1, j)] + v[(i, j)]);
        out.u[(i, j)] = (ue * ue - uw * uw + un * vn - us * vs) * inv_h;
    }
    for (i, j) in v.interior().collect::<Vec<_>>() {
        let vn = 0.5 * (v[(i, j)] + v[(i, j + 1)]);
        let vs = 0.5 * (v[(i, j - 1)] + v[(i, j)]);
        let ve = 0.5 * (v[(i, j)] + v[(i + 1, j)]);
        let vw = 0.5 * (v[(i - 1, j)] + v[(i, j)]);
        let ue = 0.5 * (u[(i + 1, j - 1)] + u[(i + 1, j)]);
        let uw = 0.5 * (u[(i, j - 1)] + u[(i, j)]);
        out.v[(i, j)] = (vn * vn - vs * vs + ue * ve - uw * vw) * inv_h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_divfree, momentum, Boundary, VelocityProfile};
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_decay() {
        // u = sin x cos y, v = -cos x sin y decays as exp(-2 ν t).
        let n = 32;
        let h = 2.0 * PI / n as f64;
        let spec = GridSpec::periodic([n, n], h, [0.0, 0.0], 2).unwrap();
        let params = FluidParams {
            rho: 1.0,
            mu: 0.1,
            viscous: ViscousScheme::CrankNicolson,
            cfl_safety: 0.5,
            stokes: false,
        };
        let solver = FluidSolver::new(spec.clone(), params).unwrap();
        let mut st = FluidState::new(&spec);
        for (i, j) in st.u.u.interior().collect::<Vec<_>>() {
            let x = spec.face_center(Component::X, i, j);
            st.u.u[(i, j)] = x[0].sin() * x[1].cos();
        }
        for (i, j) in st.u.v.interior().collect::<Vec<_>>() {
            let x = spec.face_center(Component::Y, i, j);
            st.u.v[(i, j)] = -x[0].cos() * x[1].sin();
        }
        let f = spec.new_field();
        let dt = 0.05;
        for _ in 0..20 {
            let s = solver.step(&mut st, &f, dt).unwrap();
            assert!(s.max_divergence < 1e-10);
        }
        let decay = (-2.0 * 0.1 * st.t).exp();
        let x = spec.face_center(Component::X, 3, 5);
        let exact = x[0].sin() * x[1].cos() * decay;
        assert!((st.u.u[(3, 5)] - exact).abs() < 2e-3, "{} vs {exact}", st.u.u[(3, 5)]);
    }

    #[test]
    fn momentum_conserved_periodic() {
        let spec = GridSpec::periodic([16, 16], 1.0 / 16.0, [0.0, 0.0], 2).unwrap();
        let solver = FluidSolver::new(spec.clone(), FluidParams::default()).unwrap();
        let mut st = FluidState::from_velocity(&spec, make_divfree(&spec, 1, 0.02).unwrap(), 0.0);
        let m0 = momentum(&spec, &st.u, 1.0);
        let f = spec.new_field();
        for _ in 0..10 {
            solver.step(&mut st, &f, 0.005).unwrap();
        }
        let m1 = momentum(&spec, &st.u, 1.0);
        assert!((m0[0] - m1[0]).abs() < 1e-13 && (m0[1] - m1[1]).abs() < 1e-13);
    }

    #[test]
    fn poiseuille_is_steady() {
        // Pressure-driven channel between walls with periodic x.
        let (nx, ny) = (8, 16);
        let h = 1.0 / ny as f64;
        let spec = GridSpec::new(
            [nx, ny],
            h,
            [0.0, 0.0],
            2,
            [Boundary::Periodic, Boundary::Periodic, Boundary::Wall, Boundary::Wall],
        )
        .unwrap();
        let mu = 0.5;
        let g = 1.0;
        let params = FluidParams {
            rho: 1.0,
            mu,
            viscous: ViscousScheme::CrankNicolson,
            cfl_safety: 0.5,
            stokes: false,
        };
        let solver = FluidSolver::new(spec.clone(), params).unwrap();
        // The discrete steady state of μ u_yy = -g with the reflected wall
        // ghost is the parabola shifted by a h²/4, a = g / 2μ.
        let a = g / (2.0 * mu);
        let exact = |y: f64| a * y * (1.0 - y);
        let mut st = FluidState::new(&spec);
        for (i, j) in st.u.u.interior().collect::<Vec<_>>() {
            st.u.u[(i, j)] = exact(spec.face_center(Component::X, i, j)[1]);
        }
        let mut f = spec.new_field();
        for (i, j) in f.u.interior().collect::<Vec<_>>() {
            f.u[(i, j)] = g;
        }
        for _ in 0..400 {
            solver.step(&mut st, &f, 0.01).unwrap();
        }
        for j in 0..ny as isize {
            let y = spec.face_center(Component::X, 0, j)[1];
            let discrete = exact(y) + a * h * h / 4.0;
            assert!((st.u.u[(2, j)] - discrete).abs() < 1e-6, "{j}");
            assert!(st.u.v[(2, j)].abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_large_cfl() {
        let spec = GridSpec::periodic([8, 8], 0.125, [0.0, 0.0], 2).unwrap();
        let solver = FluidSolver::new(spec.clone(), FluidParams::default()).unwrap();
        let mut st = FluidState::new(&spec);
        st.u.u.fill(1.0);
        let f = spec.new_field();
        assert!(matches!(solver.step(&mut st, &f, 1.0), Err(Error::StepRejected { .. })));
        assert!((solver.stable_dt(&st.u) - 0.0625).abs() < 1e-15);

        let still = FluidSolver::new(
            spec.clone(),
            FluidParams {
                mu: 0.0,
                ..FluidParams::default()
            },
        )
        .unwrap();
        assert_eq!(still.stable_dt(&spec.new_field()), f64::INFINITY);
        let h = 1.0 / 32.0;
        let s32 = GridSpec::periodic([32, 32], h, [0.0, 0.0], 2).unwrap();
        let visc = FluidSolver::new(
            s32.clone(),
            FluidParams {
                mu: 0.5,
                ..FluidParams::default()
            },
        )
        .unwrap();
        assert!((visc.stable_dt(&s32.new_field()) - 0.25 * h * h / 0.5).abs() < 1e-18);
    }

    #[test]
    fn inflow_outflow_channel_divergence_free() {
        let spec = GridSpec::new(
            [24, 8],
            1.0 / 8.0,
            [0.0, 0.0],
            2,
            [
                Boundary::Inflow(VelocityProfile::new(|c, _, p, _| match c {
                    Component::X => 4.0 * p[1] * (1.0 - p[1]),
                    Component::Y => 0.0,
                })),
                Boundary::Traction { pressure: 0.0 },
                Boundary::Wall,
                Boundary::Wall,
            ],
        )
        .unwrap();
        let params = FluidParams {
            rho: 1.0,
            mu: 0.05,
            viscous: ViscousScheme::CrankNicolson,
            cfl_safety: 0.5,
            stokes: false,
        };
        let solver = FluidSolver::new(spec.clone(), params).unwrap();
        let mut st = FluidState::new(&spec);
        let f = spec.new_field();
        for _ in 0..50 {
            let s = solver.step(&mut st, &f, 0.02).unwrap();
            assert!(s.max_divergence < 1e-9);
        }
        // Outflow flux matches inflow flux.
        let flux = |i: isize| -> f64 { (0..8).map(|j| st.u.u[(i, j)]).sum::<f64>() * spec.h };
        assert!((flux(0) - flux(24)).abs() < 1e-10);
        assert!(flux(24) > 0.5);
    }
}
