//! Declarative benchmark configuration, read from TOML. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{FluidParams, ViscousScheme};
use crate::kernels::KernelMode;
use crate::lagrangian::Material;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    Membrane,
    Channel,
    Block,
    Cook,
    Band,
    TurekHron,
}

impl BenchmarkKind {
    /// Whether `n` counts structural elements (M) rather than fluid cells.
    pub fn resolution_is_structural(self) -> bool {
        matches!(self, BenchmarkKind::Block | BenchmarkKind::Cook)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConfig {
    pub rho: f64,
    pub mu: f64,
    #[serde(default = "default_viscous")]
    pub viscous: ViscousScheme,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
}

fn default_viscous() -> ViscousScheme {
    ViscousScheme::Explicit
}

fn default_cfl() -> f64 {
    0.5
}

impl FluidConfig {
    pub fn params(&self) -> FluidParams {
        FluidParams {
            rho: self.rho,
            mu: self.mu,
            viscous: self.viscous,
            cfl_safety: self.cfl_safety,
            stokes: false,
        }
    }
}

/// How a penalty coefficient scales with the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Absolute,
    /// c · Δx/Δt
    DxPerDt,
    /// c · Δx/Δt²
    DxPerDt2,
    /// c · ρ/Δt²
    RhoPerDt2,
    /// c · ρΔx/Δt²
    RhoDxPerDt2,
    /// c · ρΔx/Δt
    RhoDxPerDt,
}

impl Scaling {
    pub fn apply(self, c: f64, dx: f64, dt: f64, rho: f64) -> f64 {
        match self {
            Scaling::Absolute => c,
            Scaling::DxPerDt => c * dx / dt,
            Scaling::DxPerDt2 => c * dx / (dt * dt),
            Scaling::RhoPerDt2 => c * rho / (dt * dt),
            Scaling::RhoDxPerDt2 => c * rho * dx / (dt * dt),
            Scaling::RhoDxPerDt => c * rho * dx / dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TetherConfig {
    pub kappa: f64,
    pub kappa_scaling: Scaling,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "absolute")]
    pub eta_scaling: Scaling,
}

fn absolute() -> Scaling {
    Scaling::Absolute
}

impl TetherConfig {
    pub fn resolve(&self, dx: f64, dt: f64, rho: f64) -> (f64, f64) {
        (
            self.kappa_scaling.apply(self.kappa, dx, dt, rho),
            self.eta_scaling.apply(self.eta, dx, dt, rho),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub name: String,
    pub benchmark: BenchmarkKind,
    /// Delta kernel, e.g. "IB4", "BS3", "CBS32".
    pub kernel: String,
    /// Lagrangian spacing over Eulerian spacing.
    pub mfac: f64,
    /// Fluid cells N along the reference direction, or structural elements
    /// M along the longest edge for the block and Cook benchmarks.
    pub n: usize,
    /// Time step as a multiple of Δx.
    pub dt_per_dx: f64,
    pub t_final: f64,
    /// Load ramp duration; zero applies the full load at once.
    #[serde(default)]
    pub t_load: f64,
    /// Load magnitude (traction, pressure jump or inflow speed).
    pub load: f64,
    pub fluid: FluidConfig,
    pub material: Material,
    #[serde(default)]
    pub tether: Option<TetherConfig>,
    /// Band thickness (band only); defaults to a tenth of the height.
    #[serde(default)]
    pub thickness: Option<f64>,
    /// Channel inclination in degrees (channel only).
    #[serde(default = "default_channel_angle")]
    pub channel_angle: f64,
    /// Passive tracer markers (membrane only); zero uses the structure.
    #[serde(default)]
    pub tracers: usize,
    /// Record diagnostics every this many steps.
    #[serde(default = "one")]
    pub output_every: usize,
    /// Characteristic velocity for steady-state detection.
    #[serde(default = "one_f")]
    pub u_char: f64,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
    #[serde(default = "default_steady_window")]
    pub steady_window: usize,
    #[serde(default)]
    pub stop_at_steady: bool,
    /// Bound on consecutive time-step halvings after a rejected step.
    #[serde(default = "default_halvings")]
    pub max_halvings: u32,
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

fn default_channel_angle() -> f64 {
    30.0
}

fn default_steady_tol() -> f64 {
    1e-6
}

fn default_steady_window() -> usize {
    100
}

fn default_halvings() -> u32 {
    6
}

impl BenchmarkConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_toml(&s).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn kernel_mode(&self) -> Result<KernelMode> {
        self.kernel.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.kernel_mode()?;
        if !(self.mfac > 0.0 && self.mfac.is_finite()) {
            return bad(format!("mfac must be positive, got {}", self.mfac));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.dt_per_dx > 0.0) {
            return bad(format!("dt_per_dx must be positive, got {}", self.dt_per_dx));
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.t_load >= 0.0 && self.t_load <= self.t_final) {
            return bad(format!("need 0 <= t_load <= t_final, got {}", self.t_load));
        }
        if !(self.fluid.rho > 0.0 && self.fluid.mu >= 0.0 && self.fluid.cfl_safety > 0.0) {
            return bad("fluid needs rho > 0, mu >= 0, cfl_safety > 0".into());
        }
        if !(0.0..=30.0).contains(&self.channel_angle) {
            return bad(format!(
                "channel_angle must lie in [0, 30] degrees, got {}",
                self.channel_angle
            ));
        }
        if self.output_every == 0 || self.steady_window == 0 {
            return bad("output_every and steady_window must be positive".into());
        }
        if let Some(t) = &self.tether {
            if !(t.kappa >= 0.0 && t.eta >= 0.0) || (t.kappa == 0.0 && t.eta == 0.0) {
                return bad("tether needs kappa, eta >= 0, not both zero".into());
            }
        }
        self.material.validate()
    }

    /// Ramp factor min(t/T_l, 1).
    pub fn ramp(&self, t: f64) -> f64 {
        if self.t_load > 0.0 {
            (t / self.t_load).min(1.0)
        } else {
            1.0
        }
    }

    /// Short label for file names: `<kernel>_mfac<value>`.
    pub fn cell_label(&self) -> String {
        format!("{}_mfac{}", self.kernel, self.mfac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
name = "m"
benchmark = "membrane"
kernel = "CBS32"
mfac = 0.5
n = 16
dt_per_dx = 0.125
t_final = 0.1
load = 1.0
[fluid]
rho = 1.0
mu = 0.01
[material]
law = "membrane_spring"
g = 1.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = BenchmarkConfig::from_toml(MIN).unwrap();
        assert_eq!(c.benchmark, BenchmarkKind::Membrane);
        assert_eq!(c.steady_window, 100);
        assert_eq!(c.material.nu_stab, -1.0);
        let back = BenchmarkConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        let extra = format!("{MIN}\n[extra]\nfoo = 1\n");
        assert!(BenchmarkConfig::from_toml(&extra).is_err());
        let typo = MIN.replace("mfac = 0.5", "mfac = 0.5\nmfca = 1.0");
        assert!(BenchmarkConfig::from_toml(&typo).is_err());
        let bad_kernel = MIN.replace("CBS32", "CBS33");
        assert!(BenchmarkConfig::from_toml(&bad_kernel).is_err());
        let bad_load = MIN.replace("t_final = 0.1", "t_final = 0.1\nt_load = 0.2");
        assert!(BenchmarkConfig::from_toml(&bad_load).is_err());
    }

    #[test]
    fn ramp() {
        let mut c = BenchmarkConfig::from_toml(MIN).unwrap();
        assert_eq!(c.ramp(0.0), 1.0);
        c.t_load = 40.0;
        assert_eq!(c.ramp(10.0), 0.25);
        assert_eq!(c.ramp(50.0), 1.0);
    }
}
