//! Geometry, boundary data and structures of each benchmark.

use std::f64::consts::PI;

use super::config::{BenchmarkConfig, BenchmarkKind};
use crate::error::{Error, Result};
use crate::fluid::FluidParams;
use crate::grid::{Boundary, Component, GridSpec, StaggeredField, VelocityProfile};
use crate::kernels::DeltaKernel;
use crate::lagrangian::{mesh::circle_points, EdgeLoad, LagrangianMesh, Law, Material, QuadCache, Target, Tether};

/// Ghost layers: enough for the widest kernel.
const GHOST: usize = 4;

/// Membrane radius and centre.
pub const MEMBRANE_R: f64 = 0.25;
pub const MEMBRANE_C: [f64; 2] = [0.5, 0.5];

/// Channel width measured along its normal.
pub const CHANNEL_WIDTH: f64 = 1.0;

/// Turek–Hron channel height, cylinder and beam.
pub const TH_H: f64 = 0.41;
pub const TH_CENTER: [f64; 2] = [0.2, 0.2];
pub const TH_RADIUS: f64 = 0.05;
pub const TH_TIP: [f64; 2] = [0.6, 0.2];
pub const TH_BEAM_H: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct Body {
    pub name: &'static str,
    pub mesh: LagrangianMesh,
    /// `None` for rigid, purely tethered bodies.
    pub material: Option<Material>,
    pub cache: Option<QuadCache>,
    pub tethers: Vec<Tether>,
    pub loads: Vec<EdgeLoad>,
}

impl Body {
    fn new(name: &'static str, mesh: LagrangianMesh, material: Option<Material>) -> Result<Self> {
        let cache = match (&material, mesh.quad_elements().is_empty()) {
            (Some(_), false) => Some(QuadCache::new(&mesh)?),
            _ => None,
        };
        Ok(Self {
            name,
            mesh,
            material,
            cache,
            tethers: Vec::new(),
            loads: Vec::new(),
        })
    }
}

/// Everything a run needs besides the time loop.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kind: BenchmarkKind,
    pub spec: GridSpec,
    pub fluid: FluidParams,
    pub delta: DeltaKernel,
    pub dt: f64,
    pub bodies: Vec<Body>,
    /// Passive markers advected with the structure's interpolation.
    pub tracers: Vec<[f64; 2]>,
    pub initial_velocity: Option<StaggeredField>,
    /// (body, node) whose displacement is reported.
    pub probe: Option<(usize, usize)>,
    /// Nodes of body 0 over which the band reports its largest x-displacement.
    pub probe_set: Vec<usize>,
}

pub fn build(cfg: &BenchmarkConfig) -> Result<Problem> {
    cfg.validate()?;
    let mode = cfg.kernel_mode()?;
    match cfg.benchmark {
        BenchmarkKind::Membrane => membrane(cfg, mode),
        BenchmarkKind::Channel => channel(cfg, mode),
        BenchmarkKind::Block => block(cfg, mode),
        BenchmarkKind::Cook => cook(cfg, mode),
        BenchmarkKind::Band => band(cfg, mode),
        BenchmarkKind::TurekHron => turek_hron(cfg, mode),
    }
}

fn walls() -> [Boundary; 4] {
    std::array::from_fn(|_| Boundary::Wall)
}

fn require_law(cfg: &BenchmarkConfig, laws: &[Law]) -> Result<Material> {
    if !laws.contains(&cfg.material.law) {
        return Err(Error::InvalidConfig(format!(
            "{:?} benchmark does not support {:?}",
            cfg.benchmark, cfg.material.law
        )));
    }
    Ok(cfg.material)
}

fn tether_coeffs(cfg: &BenchmarkConfig, h: f64, dt: f64) -> Result<(f64, f64)> {
    cfg.tether
        .map(|t| t.resolve(h, dt, cfg.fluid.rho))
        .ok_or_else(|| Error::InvalidConfig(format!("{:?} benchmark needs [tether]", cfg.benchmark)))
}

fn problem(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode, spec: GridSpec, bodies: Vec<Body>) -> Problem {
    let h = spec.h;
    Problem {
        kind: cfg.benchmark,
        fluid: cfg.fluid.params(),
        delta: DeltaKernel::new(mode, h),
        dt: cfg.dt_per_dx * h,
        spec,
        bodies,
        tracers: Vec::new(),
        initial_velocity: None,
        probe: None,
        probe_set: Vec::new(),
    }
}

/// Closed elastic fiber at rest in a doubly periodic unit square.
fn membrane(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode) -> Result<Problem> {
    let mat = require_law(cfg, &[Law::MembraneSpring])?;
    let n = cfg.n;
    let h = 1.0 / n as f64;
    let spec = GridSpec::periodic([n, n], h, [0.0, 0.0], GHOST)?;
    let m = (2.0 * PI * MEMBRANE_R / (cfg.mfac * h)).ceil() as usize;
    let mesh = LagrangianMesh::circle_fiber(MEMBRANE_C, MEMBRANE_R, m.max(3))?;
    let body = Body::new("membrane", mesh, Some(mat))?;
    let mut p = problem(cfg, mode, spec, vec![body]);
    if cfg.tracers >= 3 {
        p.tracers = circle_points(MEMBRANE_C, MEMBRANE_R, cfg.tracers);
    }
    Ok(p)
}

/// Coordinate across a channel inclined at `theta` (0 and 1 on the plates).
pub fn channel_s(p: [f64; 2], theta: f64) -> f64 {
    (p[1] * theta.cos() - p[0] * theta.sin()) / CHANNEL_WIDTH
}

/// Exact Poiseuille velocity inside the inclined channel, zero outside.
pub fn channel_exact(p: [f64; 2], theta: f64, dp_dl: f64, mu: f64) -> [f64; 2] {
    let s = channel_s(p, theta) * CHANNEL_WIDTH;
    if !(0.0..=CHANNEL_WIDTH).contains(&s) {
        return [0.0, 0.0];
    }
    let mag = -dp_dl / (2.0 * mu) * s * (s - CHANNEL_WIDTH);
    [mag * theta.cos(), mag * theta.sin()]
}

/// Flow between two tethered plates inclined at π/6, driven by the exact
/// solution imposed on the domain boundary. With a load time the boundary
/// data ramps up from a fluid at rest.
fn channel(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode) -> Result<Problem> {
    let n = cfg.n;
    let h = 1.0 / n as f64;
    let ny = (2.25 * n as f64).round() as usize;
    let (dp, mu, t_load) = (cfg.load, cfg.fluid.mu, cfg.t_load);
    let theta = cfg.channel_angle.to_radians();
    let ramp = move |t: f64| if t_load > 0.0 { (t / t_load).min(1.0) } else { 1.0 };
    let profile = VelocityProfile::new(move |c, t, p, _h| ramp(t) * channel_exact(p, theta, dp, mu)[c.axis()]);
    let bcs = std::array::from_fn(|_| Boundary::Inflow(profile.clone()));
    let spec = GridSpec::new([n, ny], h, [0.0, -0.25], GHOST, bcs)?;
    let dt = cfg.dt_per_dx * h;
    let (kappa, eta) = tether_coeffs(cfg, h, dt)?;
    let (tan, off) = (theta.tan(), CHANNEL_WIDTH / theta.cos());
    // Plates stop half a kernel support short of the inflow sides, where
    // the boundary data already carries the no-slip profile; markers
    // closer to the boundary would lose part of their spread force.
    let inset = 0.5 * mode.max_points() as f64 * h;
    let (x0, x1) = (inset, 1.0 - inset);
    let len = (x1 - x0) / theta.cos();
    let segs = (len / (cfg.mfac * h)).ceil() as usize;
    let mut bodies = Vec::new();
    for (name, y0) in [("lower_plate", 0.0), ("upper_plate", off)] {
        let mesh = LagrangianMesh::line([x0, y0 + x0 * tan], [x1, y0 + x1 * tan], segs)?;
        let mut b = Body::new(name, mesh, None)?;
        let all = (0..b.mesh.len()).collect();
        b.tethers.push(Tether::new(kappa, eta, all, Target::fixed())?);
        bodies.push(b);
    }
    let mut p = problem(cfg, mode, spec, bodies);
    let mut u0 = p.spec.new_field();
    for c in Component::ALL {
        for (i, j) in u0.comp(c).interior().collect::<Vec<_>>() {
            let x = p.spec.face_center(c, i, j);
            u0.comp_mut(c)[(i, j)] = ramp(0.0) * channel_exact(x, theta, dp, mu)[c.axis()];
        }
    }
    p.initial_velocity = Some(u0);
    Ok(p)
}

/// Elastic block in a walled 40 × 40 box, compressed on the middle of its
/// top face.
fn block(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode) -> Result<Problem> {
    let mat = require_law(cfg, &[Law::NeoHookean, Law::SaintVenantKirchhoff])?;
    let m = cfg.n;
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidConfig("block needs an even element count".into()));
    }
    let n = (m as f64 * cfg.mfac * 40.0 / 20.0).ceil() as usize;
    let h = 40.0 / n as f64;
    let spec = GridSpec::new([n, n], h, [0.0, 0.0], GHOST, walls())?;
    let dt = cfg.dt_per_dx * h;
    let (kappa, eta) = tether_coeffs(cfg, h, dt)?;
    let mesh = LagrangianMesh::rectangle([10.0, 15.0], [20.0, 10.0], [m, m / 2])?;
    let eps = 1e-9;
    let bottom = mesh.nodes_where(|p| p[1] < 15.0 + eps);
    let top = mesh.nodes_where(|p| p[1] > 25.0 - eps);
    let loaded = mesh.boundary_edges_where(|p| p[1] > 25.0 - eps && (15.0 - eps..=25.0 + eps).contains(&p[0]));
    let probe = mesh.nearest_node([20.0, 25.0]);
    let mut b = Body::new("block", mesh, Some(mat))?;
    b.tethers
        .push(Tether::new(kappa, eta, bottom, Target::fixed())?.only([false, true]));
    b.tethers
        .push(Tether::new(kappa, eta, top, Target::fixed())?.only([true, false]));
    b.loads.push(EdgeLoad {
        edges: loaded,
        traction: [0.0, -cfg.load],
    });
    let mut p = problem(cfg, mode, spec, vec![b]);
    p.probe = Some((0, probe));
    Ok(p)
}

/// Cook's tapered panel, clamped on the left and sheared upward on the
/// right, in a walled 13 × 13 box.
fn cook(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode) -> Result<Problem> {
    let mat = require_law(cfg, &[Law::NeoHookean, Law::SaintVenantKirchhoff])?;
    let m = cfg.n;
    let mesh = LagrangianMesh::cook(m, 0.1, [3.25, 3.5])?;
    let longest = mesh.max_edge() * m as f64;
    let n = (m as f64 * cfg.mfac * 13.0 / longest).ceil() as usize;
    let h = 13.0 / n as f64;
    let spec = GridSpec::new([n, n], h, [0.0, 0.0], GHOST, walls())?;
    let dt = cfg.dt_per_dx * h;
    let (kappa, eta) = tether_coeffs(cfg, h, dt)?;
    let eps = 1e-9;
    let left = mesh.nodes_where(|p| p[0] < 3.25 + eps);
    let right = mesh.boundary_edges_where(|p| p[0] > 8.05 - eps);
    let probe = mesh.nearest_node([8.05, 9.5]);
    let mut b = Body::new("cook", mesh, Some(mat))?;
    b.tethers.push(Tether::new(kappa, eta, left, Target::fixed())?);
    b.loads.push(EdgeLoad {
        edges: right,
        traction: [0.0, cfg.load],
    });
    let mut p = problem(cfg, mode, spec, vec![b]);
    p.probe = Some((0, probe));
    Ok(p)
}

/// Band thickness as a fraction of the domain height.
pub const BAND_THICK: f64 = 0.1;
/// Thin variant thickness.
pub const BAND_THIN: f64 = 1.0 / 32.0;

/// Vertical elastic band held by rigid end blocks in a 2 × 1 channel with
/// a pressure difference between the left and right sides.
fn band(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode) -> Result<Problem> {
    let mat = require_law(cfg, &[Law::NeoHookean, Law::SaintVenantKirchhoff])?;
    let n = cfg.n;
    let h = 1.0 / n as f64;
    let bcs = [
        Boundary::Traction { pressure: cfg.load },
        Boundary::Traction { pressure: -cfg.load },
        Boundary::Wall,
        Boundary::Wall,
    ];
    let spec = GridSpec::new([2 * n, n], h, [0.0, 0.0], GHOST, bcs)?;
    let dt = cfg.dt_per_dx * h;
    let (kappa, eta) = tether_coeffs(cfg, h, dt)?;
    let thick = cfg.thickness.unwrap_or(BAND_THICK);
    let ds = cfg.mfac * h;
    let nx = ((thick / ds).round() as usize).max(1);
    let ny = ((1.0 / ds).round() as usize).max(10);
    let mesh = LagrangianMesh::rectangle([1.0 - 0.5 * thick, 0.0], [thick, 1.0], [nx, ny])?;
    let eps = 1e-9;
    let ends = mesh.nodes_where(|p| p[1] < 0.1 + eps || p[1] > 0.9 - eps);
    let mid_y = mesh.nodes[mesh.nearest_node([1.0, 0.5])][1];
    let probe_set = mesh.nodes_where(|p| (p[1] - mid_y).abs() < eps);
    let mut b = Body::new("band", mesh, Some(mat))?;
    b.tethers.push(Tether::new(kappa, eta, ends, Target::fixed())?);
    let mut p = problem(cfg, mode, spec, vec![b]);
    p.probe_set = probe_set;
    Ok(p)
}

/// Flexible beam behind a tethered cylinder in a channel of height 0.41
/// and length 6H, with a parabolic inflow ramped over `t_load`.
fn turek_hron(cfg: &BenchmarkConfig, mode: crate::kernels::KernelMode) -> Result<Problem> {
    let mat = require_law(cfg, &[Law::SaintVenantKirchhoff, Law::NeoHookean])?;
    let ny = ((cfg.n as f64 / 6.0).round() as usize).max(2);
    let nx = 6 * ny;
    let h = TH_H / ny as f64;
    let (u_mean, t_load) = (cfg.load, cfg.t_load);
    let inflow = VelocityProfile::new(move |c, t, p, _h| match c {
        Component::X => {
            let ramp = if t_load > 0.0 { (t / t_load).min(1.0) } else { 1.0 };
            let y = p[1].clamp(0.0, TH_H);
            ramp * 1.5 * u_mean * y * (TH_H - y) / (0.5 * TH_H).powi(2)
        }
        Component::Y => 0.0,
    });
    let bcs = [
        Boundary::Inflow(inflow),
        Boundary::Traction { pressure: 0.0 },
        Boundary::Wall,
        Boundary::Wall,
    ];
    let spec = GridSpec::new([nx, ny], h, [0.0, 0.0], GHOST, bcs)?;
    let dt = cfg.dt_per_dx * h;
    let (kappa, eta) = tether_coeffs(cfg, h, dt)?;
    let ds = cfg.mfac * h;

    // Beam from the cylinder centre to the tip; the part inside the
    // cylinder is tethered.
    let len = TH_TIP[0] - TH_CENTER[0];
    let nby = (2 * ((TH_BEAM_H / ds / 2.0).round() as usize)).max(2);
    let nbx = ((len / ds).round() as usize).max(4);
    let beam = LagrangianMesh::rectangle(
        [TH_CENTER[0], TH_CENTER[1] - 0.5 * TH_BEAM_H],
        [len, TH_BEAM_H],
        [nbx, nby],
    )?;
    let inside = |p: [f64; 2]| (p[0] - TH_CENTER[0]).hypot(p[1] - TH_CENTER[1]) <= TH_RADIUS + 1e-12;
    let held = beam.nodes_where(inside);
    let tip = beam.nearest_node(TH_TIP);
    let mut b = Body::new("beam", beam, Some(mat))?;
    b.tethers.push(Tether::new(kappa, eta, held, Target::fixed())?);

    // Cylinder: area-weighted markers on a square lattice, skipping the
    // beam footprint.
    let k = (TH_RADIUS / ds).ceil() as i64;
    let mut pts = Vec::new();
    for j in -k..=k {
        for i in -k..=k {
            let p = [TH_CENTER[0] + i as f64 * ds, TH_CENTER[1] + j as f64 * ds];
            let in_beam = p[0] >= TH_CENTER[0] && (p[1] - TH_CENTER[1]).abs() <= 0.5 * TH_BEAM_H;
            if inside(p) && !in_beam {
                pts.push(p);
            }
        }
    }
    let w = vec![ds * ds; pts.len()];
    let cyl = LagrangianMesh::points(pts, w)?;
    let mut c = Body::new("cylinder", cyl, None)?;
    let all = (0..c.mesh.len()).collect();
    c.tethers.push(Tether::new(kappa, eta, all, Target::fixed())?);

    let mut p = problem(cfg, mode, spec, vec![b, c]);
    p.probe = Some((0, tip));
    Ok(p)
}
