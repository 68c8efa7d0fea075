//! Laplace-domain TC2 memory kernel.
//!
//! K(s)ρ = Σ_j [S_j, Φ_j(s)ρ − (Φ_j(s)ρ)†] with Φ_j(s)X = c·R(s)·(S_j X) and
//! R(s) = ((s+γ)𝟙 − L_S)⁻¹. Everything is assembled in the vectorized
//! picture via vec(AXB) = (Bᵀ⊗A)vec(X); the h.c. term becomes a
//! conjugation-transposition map, which is a linear operation on the
//! Hermitian subspace where the solver lives.
//!
//! The resolvent is evaluated through the spectral decomposition
//! L_S = (V⊗V)·diag(−i(E_a − E_b))·(V⊗V)ᵀ from the symmetric
//! eigen-decomposition H = V·diag(E)·Vᵀ, which is the same operator the
//! dense LU inverse would produce (to rounding) at a fraction of the cost.

use super::liouville::{transpose_index, vec_index, LiouvilleOperator};
use crate::bath::{correlation_amplitude, BathSpec};
use crate::constants::{cm2_to_rad2_ps2, cm_to_rad_ps};
use crate::error::{Error, Result};
use crate::exciton::ExcitonHamiltonian;
use crate::linalg::sandwich_diag;
use nalgebra::DMatrix;

/// Build K(s) for real s ≥ 0 (ps⁻¹). λ = 0 returns the zero operator.
pub fn memory_kernel(h: &ExcitonHamiltonian, bath: &BathSpec, s: f64) -> Result<LiouvilleOperator> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParameter(format!("s must be ≥ 0, got {s}")));
    }
    let n = h.n();
    let m = n * n;
    if bath.lambda == 0.0 {
        return Ok(LiouvilleOperator::zeros(n));
    }

    let c_cm2 = correlation_amplitude(bath);
    let c_re = cm2_to_rad2_ps2(c_cm2.re);
    let c_im = cm2_to_rad2_ps2(c_cm2.im);
    let gamma = cm_to_rad_ps(bath.gamma);

    let (values, vectors) = h.eigen();
    let omega: Vec<f64> = values.iter().map(|&e| cm_to_rad_ps(e)).collect();

    // Resolvent diagonal 1/(s + γ + i(ω_a − ω_b)) and its conditioning.
    let mut d_re = vec![0.0f64; m];
    let mut d_im = vec![0.0f64; m];
    let mut mod_min = f64::INFINITY;
    let mut mod_max = 0.0f64;
    for b in 0..n {
        for a in 0..n {
            let re = s + gamma;
            let im = omega[a] - omega[b];
            let den = re * re + im * im;
            let idx = vec_index(a, b, n);
            d_re[idx] = re / den;
            d_im[idx] = -im / den;
            let modulus = den.sqrt();
            mod_min = mod_min.min(modulus);
            mod_max = mod_max.max(modulus);
        }
    }
    let cond = mod_max / mod_min;
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::IllConditionedResolvent { cond });
    }

    // W = V⊗V (real orthogonal); R = W·diag(d)·Wᵀ.
    let mut w = DMatrix::<f64>::zeros(m, m);
    for beta in 0..n {
        for alpha in 0..n {
            let col = vec_index(alpha, beta, n);
            for b in 0..n {
                let vb = vectors[(b, beta)];
                for a in 0..n {
                    w[(vec_index(a, b, n), col)] = vectors[(a, alpha)] * vb;
                }
            }
        }
    }
    let r = sandwich_diag(&w, &d_re, &d_im);

    // K = Σ_j Comm_j · (M_j − T·conj(M_j)·T), with M_j = c·R·(I⊗S_j) nonzero
    // only on columns {j + n·b} (equal to c·R columns there), Comm_j the
    // diagonal commutator mask of S_j, and T the transpose permutation.
    let mut k = LiouvilleOperator::zeros(n);
    let mut mask = vec![0.0f64; m];
    for j in 0..n {
        for (p, mu) in mask.iter_mut().enumerate() {
            let a = p % n;
            let b = p / n;
            *mu = if a == j && b != j {
                1.0
            } else if b == j && a != j {
                -1.0
            } else {
                0.0
            };
        }
        for b in 0..n {
            let src = vec_index(j, b, n);
            let tgt = vec_index(b, j, n);
            for (p, &mu) in mask.iter().enumerate() {
                if mu == 0.0 {
                    continue;
                }
                let col_re = c_re * r.re[(p, src)] - c_im * r.im[(p, src)];
                let col_im = c_re * r.im[(p, src)] + c_im * r.re[(p, src)];
                k.mat.re[(p, src)] += mu * col_re;
                k.mat.im[(p, src)] += mu * col_im;

                let tp = transpose_index(p, n);
                let tcol_re = c_re * r.re[(tp, src)] - c_im * r.im[(tp, src)];
                let tcol_im = c_re * r.im[(tp, src)] + c_im * r.re[(tp, src)];
                k.mat.re[(p, tgt)] -= mu * tcol_re;
                k.mat.im[(p, tgt)] += mu * tcol_im;
            }
        }
    }
    Ok(k)
}
