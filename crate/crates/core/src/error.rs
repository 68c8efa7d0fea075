//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("packing infeasible: {rejections} consecutive rejections placing site {site} (n={n}, diameter={diameter} Å, min distance {min_distance} Å)")]
    PackingInfeasible {
        n: usize,
        diameter: f64,
        site: usize,
        rejections: u64,
        min_distance: f64,
    },

    #[error("chromophore pair closer than {min} Å (r = {r:.6} Å): dipole-dipole model invalid")]
    TooClose { r: f64, min: f64 },

    #[error("ill-conditioned resolvent: condition estimate {cond:.3e} exceeds 1e12")]
    IllConditionedResolvent { cond: f64 },

    #[error("singular linear system in {context} (condition estimate {cond:.3e})")]
    SingularSystem { context: String, cond: f64 },

    #[error("quadrature did not converge: achieved tolerance {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("step size underflow at t = {t} ps (h = {h:.3e} ps)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t} ps")]
    NonFiniteState { t: f64 },

    #[error("unstable dynamics: trace grew to {trace:.3e} at t = {t} ps (time-nonlocal kernel outside its contraction regime)")]
    UnstableDynamics { t: f64, trace: f64 },

    #[error("path enumeration for n = {n} has {count} paths, above the ceiling {ceiling}")]
    PathCeilingExceeded { n: usize, count: u128, ceiling: u128 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
