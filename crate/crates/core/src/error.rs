use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("kernel stencil leaves the grid at ({x}, {y}){}", node.map(|n| format!(" (node {n})")).unwrap_or_default())]
    StencilOverflow { node: Option<usize>, x: f64, y: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("inverted element {element} (det J = {det})")]
    InvertedElement { element: usize, det: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("step rejected: CFL number {cfl} exceeds limit {limit} at dt = {dt}")]
    StepRejected { cfl: f64, limit: f64, dt: f64 },

    #[error("run failed at t = {t}: {reason}")]
    RunFailed { t: f64, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
