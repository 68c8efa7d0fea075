//! Laplace-domain ETE: one linear solve at s = 0.
//!
//! With Σ = ∫₀^∞ ρ(t) dt, integrating the TC2 equation over t turns the
//! dynamics into (L_S + L_eh − K(0))·vec(Σ) = −vec(ρ(0)); the efficiency is
//! then η = 2r_trap·Σ[trap,trap] and the loss fraction Σ_j 2r_loss·Σ[j,j].

use super::liouville::{build_generator, vec_index};
use super::{elapsed_seconds, memory_kernel, wall_clock, Method, SinkSpec, TransportResult};
use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::exciton::ExcitonHamiltonian;
use crate::linalg::solve_complex;
use nalgebra::DVector;

pub fn ete_laplace(
    h: &ExcitonHamiltonian,
    bath: &BathSpec,
    sinks: &SinkSpec,
    initial_index: usize,
) -> Result<TransportResult> {
    let n = h.n();
    if initial_index >= n {
        return Err(Error::InvalidParameter(format!(
            "initial index {initial_index} out of range for n={n}"
        )));
    }
    if sinks.r_loss <= 0.0 {
        return Err(Error::InvalidParameter(
            "Laplace ETE requires r_loss > 0 (finite ∫ρ dt)".into(),
        ));
    }
    let timer = wall_clock();
    let m = n * n;

    let mut a = build_generator(h, sinks)?;
    a -= &memory_kernel(h, bath, 0.0)?;

    let mut rho0 = DVector::<f64>::zeros(m);
    rho0[vec_index(initial_index, initial_index, n)] = 1.0;
    let b_re = -&rho0;
    let b_im = DVector::<f64>::zeros(m);

    let sol = solve_complex(&a.mat, &b_re, &b_im).ok_or_else(|| Error::SingularSystem {
        context: "Laplace ETE generator".into(),
        cond: f64::INFINITY,
    })?;
    if !sol.pivot_ratio.is_finite() || sol.pivot_ratio > 1e14 {
        return Err(Error::SingularSystem {
            context: "Laplace ETE generator".into(),
            cond: sol.pivot_ratio,
        });
    }

    let (ax_re, ax_im) = a.mat.mul_vec(&sol.x_re, &sol.x_im);
    let mut residual = 0.0f64;
    for i in 0..m {
        let re = ax_re[i] + rho0[i];
        residual += re * re + ax_im[i] * ax_im[i];
    }
    let residual = residual.sqrt();

    let raw_eta = 2.0 * sinks.r_trap * sol.x_re[vec_index(sinks.trap_index, sinks.trap_index, n)];
    let raw_loss: f64 = (0..n)
        .map(|j| 2.0 * sinks.r_loss * sol.x_re[vec_index(j, j, n)])
        .sum();
    let positivity_violation = !(-1e-6..=1.0 + 1e-6).contains(&raw_eta);

    Ok(TransportResult {
        eta: raw_eta.clamp(0.0, 1.0),
        eta_loss: raw_loss.clamp(0.0, 1.0),
        residual,
        method: Method::Laplace,
        wall_time: elapsed_seconds(timer),
        positivity_violation,
    })
}
