//! The IFED midpoint time loop.

use log::{debug, info, warn};

use super::config::{BenchmarkConfig, BenchmarkKind};
use super::report::TimeSeries;
use super::setup::{build, channel_exact, Problem, CHANNEL_WIDTH};
use crate::coupling::CouplingContext;
use crate::error::{Error, Result};
use crate::fluid::{FluidSolver, FluidState};
use crate::grid::{fill_velocity_ghosts, vorticity, StaggeredField};
use crate::kernels::DeltaKernel;
use crate::lagrangian::{add_elastic_forces, jacobian_error_l2, tracer_area, LagrangianState};

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    /// Steady-state criterion met (and `stop_at_steady` was set).
    Steady {
        t: f64,
    },
    /// The run was aborted; `reason` is the error that stopped it.
    Failed {
        t: f64,
        reason: String,
    },
}

impl Outcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Failed { .. })
    }
}

pub struct Simulation {
    pub cfg: BenchmarkConfig,
    pub problem: Problem,
    pub solver: FluidSolver,
    pub coupling: CouplingContext,
    pub fluid: FluidState,
    pub bodies: Vec<LagrangianState>,
    pub tracers: Vec<[f64; 2]>,
    pub dt: f64,
    pub steps: usize,
    area0: f64,
    /// Consecutive steps below the steady-state velocity threshold.
    quiet_steps: usize,
    /// Time at which the steady-state criterion was first met.
    pub steady_at: Option<f64>,
}

impl Simulation {
    pub fn new(cfg: &BenchmarkConfig) -> Result<Self> {
        let problem = build(cfg)?;
        let solver = FluidSolver::new(problem.spec.clone(), problem.fluid)?;
        let coupling = CouplingContext::new(problem.delta, problem.spec.clone())?;
        let mut fluid = match &problem.initial_velocity {
            Some(u) => FluidState::from_velocity(&problem.spec, u.clone(), 0.0),
            None => FluidState::new(&problem.spec),
        };
        fill_velocity_ghosts(&problem.spec, &mut fluid.u, 0.0);
        let bodies = problem.bodies.iter().map(|b| LagrangianState::new(&b.mesh)).collect();
        let tracers = problem.tracers.clone();
        let mut sim = Self {
            cfg: cfg.clone(),
            dt: problem.dt,
            problem,
            solver,
            coupling,
            fluid,
            bodies,
            tracers,
            steps: 0,
            area0: 0.0,
            quiet_steps: 0,
            steady_at: None,
        };
        sim.area0 = sim.enclosed_area();
        Ok(sim)
    }

    pub fn t(&self) -> f64 {
        self.fluid.t
    }

    fn enclosed_area(&self) -> f64 {
        if self.problem.kind != BenchmarkKind::Membrane {
            return 0.0;
        }
        let pts = if self.tracers.is_empty() {
            &self.bodies[0].x
        } else {
            &self.tracers
        };
        tracer_area(pts).unwrap_or(f64::NAN)
    }

    /// Force densities of every body at positions `x` with velocities `u`.
    fn forces(&self, x: &[Vec<[f64; 2]>], u: &[Vec<[f64; 2]>], t: f64) -> Result<Vec<Vec<[f64; 2]>>> {
        let scale = self.cfg.ramp(t);
        let mut out = Vec::with_capacity(self.problem.bodies.len());
        for (k, body) in self.problem.bodies.iter().enumerate() {
            let mut f = vec![[0.0; 2]; body.mesh.len()];
            if let Some(mat) = &body.material {
                add_elastic_forces(&body.mesh, body.cache.as_ref(), mat, &x[k], &mut f)?;
            }
            for tether in &body.tethers {
                tether.add_forces(&body.mesh, &x[k], &u[k], t, &mut f);
            }
            for load in &body.loads {
                load.add_forces(&body.mesh, scale, &mut f);
            }
            out.push(f);
        }
        Ok(out)
    }

    fn interpolate_all(&self, field: &StaggeredField, x: &[Vec<[f64; 2]>]) -> Result<Vec<Vec<[f64; 2]>>> {
        x.iter()
            .map(|xs| {
                let mut u = vec![[0.0; 2]; xs.len()];
                self.coupling.interpolate(field, xs, &mut u)?;
                Ok(u)
            })
            .collect()
    }

    /// One midpoint step of size `dt`. Nothing is modified if the fluid
    /// solver rejects the step.
    fn try_step(&mut self, dt: f64) -> Result<()> {
        let t0 = self.t();
        let th = t0 + 0.5 * dt;
        let mut x: Vec<Vec<[f64; 2]>> = self.bodies.iter().map(|b| b.x.clone()).collect();
        let n_bodies = x.len();
        if !self.tracers.is_empty() {
            x.push(self.tracers.clone());
        }
        let u_n = self.interpolate_all(&self.fluid.u, &x)?;
        let x_half: Vec<Vec<[f64; 2]>> = x
            .iter()
            .zip(&u_n)
            .map(|(xs, us)| {
                xs.iter()
                    .zip(us)
                    .map(|(p, v)| [p[0] + 0.5 * dt * v[0], p[1] + 0.5 * dt * v[1]])
                    .collect()
            })
            .collect();

        let forces = self.forces(&x_half[..n_bodies], &u_n[..n_bodies], th)?;
        let mut f = self.problem.spec.new_field();
        for (k, body) in self.problem.bodies.iter().enumerate() {
            self.coupling
                .spread(&body.mesh.weights, &x_half[k], &forces[k], &mut f)?;
        }

        let u_old = self.fluid.u.clone();
        let stats = self.solver.step(&mut self.fluid, &f, dt)?;
        debug!(
            "t = {:.6e}: poisson {} it, viscous {} it, div {:.2e}, cfl {:.3}",
            self.fluid.t, stats.poisson_iterations, stats.viscous_iterations, stats.max_divergence, stats.cfl
        );
        let mut u_mid = self.problem.spec.new_field();
        u_mid.lincomb(0.5, &u_old, 0.5, &self.fluid.u);
        let u_half = self.interpolate_all(&u_mid, &x_half)?;

        for (k, (xs, us)) in x.iter().zip(&u_half).enumerate() {
            let new_x: Vec<[f64; 2]> = xs
                .iter()
                .zip(us)
                .map(|(p, v)| [p[0] + dt * v[0], p[1] + dt * v[1]])
                .collect();
            if new_x.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::RunFailed {
                    t: self.fluid.t,
                    reason: "non-finite structure position".into(),
                });
            }
            if k < n_bodies {
                let b = &mut self.bodies[k];
                b.x = new_x;
                b.u = us.clone();
                b.f = forces[k].clone();
            } else {
                self.tracers = new_x;
            }
        }
        Ok(())
    }

    /// Advance by one step, halving the step size after rejections. The
    /// step size never grows past its configured value.
    pub fn step(&mut self) -> Result<()> {
        let remaining = self.cfg.t_final - self.t();
        let mut dt = self.dt.min(remaining);
        let mut halvings = 0;
        loop {
            match self.try_step(dt) {
                Ok(()) => break,
                Err(Error::StepRejected { cfl, .. }) if halvings < self.cfg.max_halvings => {
                    halvings += 1;
                    warn!(
                        "step rejected at t = {} (cfl {cfl:.3}); halving dt to {}",
                        self.t(),
                        dt / 2.0
                    );
                    dt *= 0.5;
                    self.dt = self.dt.min(dt);
                }
                Err(e) => return Err(e),
            }
        }
        self.steps += 1;
        let vmax = self.max_node_speed();
        if vmax < self.cfg.steady_tol * self.cfg.u_char {
            self.quiet_steps += 1;
            if self.quiet_steps >= self.cfg.steady_window && self.steady_at.is_none() {
                self.steady_at = Some(self.t());
            }
        } else {
            self.quiet_steps = 0;
        }
        Ok(())
    }

    pub fn max_node_speed(&self) -> f64 {
        self.bodies
            .iter()
            .flat_map(|b| b.u.iter())
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }

    /// Column names matching [`Simulation::diagnostics`].
    pub fn columns(&self) -> Vec<String> {
        let specific: &[&str] = match self.problem.kind {
            BenchmarkKind::Membrane => &["dA", "max_vorticity"],
            BenchmarkKind::Channel => &["max_node_disp"],
            BenchmarkKind::Block | BenchmarkKind::Cook => &["dy", "j_err"],
            BenchmarkKind::Band => &["dx_max", "j_err"],
            BenchmarkKind::TurekHron => &["dx_a", "dy_a"],
        };
        let mut c = vec!["t".to_string(), "dt".to_string()];
        c.extend(specific.iter().map(|s| s.to_string()));
        c.push("max_u".into());
        c.push("max_node_speed".into());
        c
    }

    fn displacement(&self, body: usize, node: usize) -> [f64; 2] {
        let x = self.bodies[body].x[node];
        let r = self.problem.bodies[body].mesh.nodes[node];
        [x[0] - r[0], x[1] - r[1]]
    }

    pub fn diagnostics(&self) -> Vec<f64> {
        let mut row = vec![self.t(), self.dt];
        match self.problem.kind {
            BenchmarkKind::Membrane => {
                let a = self.enclosed_area();
                row.push((a - self.area0).abs() / self.area0);
                let w = vorticity(&self.problem.spec, &self.fluid.u);
                row.push(w.max_abs_interior());
            }
            BenchmarkKind::Channel => {
                let d = (0..self.bodies.len())
                    .flat_map(|b| (0..self.bodies[b].x.len()).map(move |n| (b, n)))
                    .map(|(b, n)| {
                        let d = self.displacement(b, n);
                        d[0].hypot(d[1])
                    })
                    .fold(0.0, f64::max);
                row.push(d);
            }
            BenchmarkKind::Block | BenchmarkKind::Cook => {
                let (b, n) = self.problem.probe.expect("probe node");
                row.push(self.displacement(b, n)[1]);
                row.push(jacobian_error_l2(&self.problem.bodies[0].mesh, &self.bodies[0].x));
            }
            BenchmarkKind::Band => {
                let d = self
                    .problem
                    .probe_set
                    .iter()
                    .map(|&n| self.displacement(0, n)[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                row.push(d);
                row.push(jacobian_error_l2(&self.problem.bodies[0].mesh, &self.bodies[0].x));
            }
            BenchmarkKind::TurekHron => {
                let (b, n) = self.problem.probe.expect("probe node");
                let d = self.displacement(b, n);
                row.push(d[0]);
                row.push(d[1]);
            }
        }
        row.push(self.fluid.u.max_abs());
        row.push(self.max_node_speed());
        row
    }
}

/// One sample of the channel velocity on the line x = const.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub y: f64,
    /// Normal coordinate across the channel, 0 and 1 on the plates.
    pub s: f64,
    pub speed: f64,
    pub exact: f64,
}

impl Simulation {
    /// Speed across the channel on the vertical line `x`, interpolated with
    /// the bilinear BS2 kernel so the sampling adds no extra smoothing.
    pub fn channel_profile(&self, x: f64, samples: usize) -> Result<Vec<ProfileSample>> {
        let spec = &self.problem.spec;
        let ctx = CouplingContext::new(DeltaKernel::parse("BS2", spec.h)?, spec.clone())?;
        let mut u = self.fluid.u.clone();
        fill_velocity_ghosts(spec, &mut u, self.t());
        let (theta, w) = (self.cfg.channel_angle.to_radians(), CHANNEL_WIDTH);
        let y0 = x * theta.tan();
        let span = w / theta.cos();
        (0..samples)
            .map(|k| {
                let s = (k as f64 + 0.5) / samples as f64;
                let y = y0 + s * span;
                let v = ctx.interpolate_point(&u, [x, y])?;
                let e = channel_exact([x, y], theta, self.cfg.load, self.cfg.fluid.mu);
                Ok(ProfileSample {
                    y,
                    s,
                    speed: v[0].hypot(v[1]),
                    exact: e[0].hypot(e[1]),
                })
            })
            .collect()
    }
}

/// Largest relative speed error at samples farther than `layer` from both
/// plates (distances measured along the channel normal).
pub fn profile_max_rel_error(profile: &[ProfileSample], layer: f64) -> f64 {
    profile
        .iter()
        .filter(|p| p.s.min(1.0 - p.s) * CHANNEL_WIDTH > layer)
        .map(|p| (p.speed - p.exact).abs() / p.exact)
        .fold(0.0, f64::max)
}

/// Width of the numerical boundary layer: the largest distance from the
/// nearer plate at which the speed still differs from the exact one by
/// more than half of the exact value.
pub fn boundary_layer_width(profile: &[ProfileSample]) -> f64 {
    profile
        .iter()
        .filter(|p| (p.speed - p.exact).abs() > 0.5 * p.exact)
        .map(|p| p.s.min(1.0 - p.s) * CHANNEL_WIDTH)
        .fold(0.0, f64::max)
}

pub struct RunResult {
    pub series: TimeSeries,
    pub outcome: Outcome,
    pub sim: Simulation,
}

/// Run a benchmark to `t_final` (or to steady state when requested),
/// recording diagnostics every `output_every` steps and at the end.
/// Solver failures end the run with [`Outcome::Failed`] rather than an
/// error, since they are legitimate results.
pub fn run(cfg: &BenchmarkConfig) -> Result<RunResult> {
    let mut sim = Simulation::new(cfg)?;
    let mut series = TimeSeries::new(sim.columns());
    series.push(sim.diagnostics());
    info!(
        "{}: {:?} kernel {} grid {:?} h {} dt {} nodes {}",
        cfg.name,
        cfg.benchmark,
        cfg.kernel,
        sim.problem.spec.cells,
        sim.problem.spec.h,
        sim.dt,
        sim.bodies.iter().map(|b| b.x.len()).sum::<usize>()
    );
    let eps = 1e-9 * sim.dt;
    let outcome = loop {
        if sim.t() >= cfg.t_final - eps {
            break Outcome::Completed;
        }
        if let Err(e) = sim.step() {
            warn!("{}: run failed at t = {}: {e}", cfg.name, sim.t());
            break Outcome::Failed {
                t: sim.t(),
                reason: e.to_string(),
            };
        }
        let last = sim.t() >= cfg.t_final - eps;
        if sim.steps % cfg.output_every == 0 || last {
            series.push(sim.diagnostics());
        }
        if let (true, Some(t)) = (cfg.stop_at_steady, sim.steady_at) {
            if series.last_t() != Some(sim.t()) {
                series.push(sim.diagnostics());
            }
            break Outcome::Steady { t };
        }
    };
    if let Outcome::Failed { .. } = outcome {
        if series.last_t() != Some(sim.t()) {
            series.push(sim.diagnostics());
        }
    }
    Ok(RunResult { series, outcome, sim })
}
