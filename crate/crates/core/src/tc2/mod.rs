//! TC2 time-nonlocal master equation solver with loss and trap sinks.
//!
//! The density matrix is column-major vectorized (index a + N·b for entry
//! ρ[a,b]); superoperators are complex m×m matrices, m = N², carried as
//! split real/imaginary pairs. All energies are converted to angular
//! frequency (rad/ps) when operators are assembled; sink rates are ps⁻¹
//! as given.

mod kernel;
mod laplace;
mod liouville;
mod propagate;

pub use kernel::memory_kernel;
pub use laplace::ete_laplace;
pub use liouville::{build_coherent, build_generator, build_sinks, LiouvilleOperator};
pub use propagate::{
    ete_time_domain, propagate_time_domain, propagate_with_options, PropagateOptions, StepMode,
    Trajectory,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sink specification: uniform per-site loss plus trapping at one site, both
/// entering as anti-commutators −r{P, ρ} (population decay rate 2r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkSpec {
    /// Per-site loss rate in ps⁻¹ (uniform over all sites).
    pub r_loss: f64,
    /// Trapping rate in ps⁻¹ applied at `trap_index` on top of the loss.
    pub r_trap: f64,
    pub trap_index: usize,
}

impl SinkSpec {
    pub fn new(r_loss: f64, r_trap: f64, trap_index: usize) -> Result<Self> {
        if !r_loss.is_finite() || r_loss < 0.0 {
            return Err(Error::InvalidParameter(format!("r_loss must be ≥ 0, got {r_loss}")));
        }
        if !r_trap.is_finite() || r_trap <= 0.0 {
            return Err(Error::InvalidParameter(format!("r_trap must be > 0, got {r_trap}")));
        }
        Ok(Self {
            r_loss,
            r_trap,
            trap_index,
        })
    }

    /// Total decay rate at site j.
    pub(crate) fn rate(&self, j: usize) -> f64 {
        self.r_loss + if j == self.trap_index { self.r_trap } else { 0.0 }
    }
}

/// How an ETE value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "laplace")]
    Laplace,
    #[serde(rename = "time-domain")]
    TimeDomain,
}

/// Transport efficiency result with solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    /// Energy transfer efficiency η = 2r_trap∫⟨trap|ρ|trap⟩dt, clamped to [0,1].
    pub eta: f64,
    /// Fraction lost to the uniform loss channel, Σ_j 2r_loss∫⟨j|ρ|j⟩dt.
    pub eta_loss: f64,
    /// Laplace: ‖A·vec(Σ) + vec(ρ₀)‖₂. Time domain: the trailing trace at the
    /// stopping time (bounds the truncated tail of the η integral).
    pub residual: f64,
    pub method: Method,
    /// Wall-clock seconds spent in the solve (0.0 on targets without a clock).
    pub wall_time: f64,
    /// Set when TC2 positivity is violated beyond tolerance (η outside
    /// [−10⁻⁶, 1+10⁻⁶] before clamping, or a sampled population below −10⁻⁶).
    pub positivity_violation: bool,
}

#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn wall_clock() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn wall_clock() -> Option<std::time::Instant> {
    None
}

pub(crate) fn elapsed_seconds(start: Option<std::time::Instant>) -> f64 {
    start.map(|t| t.elapsed().as_secs_f64()).unwrap_or(0.0)
}
