//! Independent oracles shared by the integration suites.
//!
//! Everything here deliberately avoids the crate's production numerics:
//! eigenproblems go through a hand-rolled cyclic Jacobi sweep instead of
//! nalgebra's tridiagonalization, the λ = 0 dynamics through a fixed-step
//! RK4 wavefunction propagator instead of the density-matrix steppers, the
//! memory kernel through explicit Simpson quadrature of the bath-correlation
//! integral instead of the resolvent formula, and path scoring through a
//! literal recursive permutation walk.

#![allow(dead_code)]

use excitonet::bath::{correlation_amplitude, BathSpec};
use excitonet::constants::{cm2_to_rad2_ps2, cm_to_rad_ps};
use excitonet::exciton::ExcitonHamiltonian;
use excitonet::tc2::SinkSpec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with matching eigenvector columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);

    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)] * m[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// λ = 0 reference dynamics: fixed-step RK4 on the wavefunction equation
/// ψ̇ = −i·H̃ψ − diag(r)·ψ with H̃ in rad/ps and r_j the per-site sink rate.
/// Returns |ψ_j(t)|² at each requested time (`times` must be ascending).
pub fn wavefunction_populations(
    h: &ExcitonHamiltonian,
    sinks: &SinkSpec,
    initial_index: usize,
    times: &[f64],
    dt: f64,
) -> Vec<Vec<f64>> {
    let n = h.n();
    let ht = h.matrix() * cm_to_rad_ps(1.0);
    let rates: Vec<f64> = (0..n)
        .map(|j| sinks.r_loss + if j == sinks.trap_index { sinks.r_trap } else { 0.0 })
        .collect();

    let deriv = |psi: &DVector<Complex64>| -> DVector<Complex64> {
        DVector::from_fn(n, |a, _| {
            let mut acc = Complex64::ZERO;
            for b in 0..n {
                acc += ht[(a, b)] * psi[b];
            }
            Complex64::new(0.0, -1.0) * acc - rates[a] * psi[a]
        })
    };
    let rk4 = |psi: &DVector<Complex64>, h_step: f64| -> DVector<Complex64> {
        let k1 = deriv(psi);
        let k2 = deriv(&(psi + &k1 * Complex64::from(h_step / 2.0)));
        let k3 = deriv(&(psi + &k2 * Complex64::from(h_step / 2.0)));
        let k4 = deriv(&(psi + &k3 * Complex64::from(h_step)));
        psi + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
            * Complex64::from(h_step / 6.0)
    };

    let mut psi = DVector::<Complex64>::zeros(n);
    psi[initial_index] = Complex64::ONE;
    let mut t = 0.0f64;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        assert!(target >= t - 1e-12, "times must be ascending");
        while target - t > 1e-12 {
            let step = dt.min(target - t);
            psi = rk4(&psi, step);
            t += step;
        }
        out.push(psi.iter().map(|z| z.norm_sqr()).collect());
    }
    out
}

/// Direct quadrature of the s = 0 memory-kernel action
/// K(0)ρ = Σ_j [S_j, m_j − m_j†],  m_j = ∫₀^∞ C(τ)·e^{−iH̃τ} S_jρ e^{iH̃τ} dτ,
/// evaluated by composite Simpson on a horizon where e^{−γ̃τ} has decayed to
/// rounding, with the unitary built from the Jacobi eigendecomposition.
pub fn kernel_action_quadrature(
    h: &ExcitonHamiltonian,
    bath: &BathSpec,
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let n = h.n();
    assert_eq!(rho.nrows(), n);
    if bath.lambda == 0.0 {
        return DMatrix::zeros(n, n);
    }

    let c_cm2 = correlation_amplitude(bath);
    let c_tilde = Complex64::new(cm2_to_rad2_ps2(c_cm2.re), cm2_to_rad2_ps2(c_cm2.im));
    let gamma = cm_to_rad_ps(bath.gamma);

    let (values, vectors) = jacobi_eigen(h.matrix());
    let omega: Vec<f64> = values.iter().map(|&e| cm_to_rad_ps(e)).collect();
    let omega_span = omega.last().unwrap() - omega[0];

    let t_max = 34.0 / gamma;
    let steps_per_ps = (240.0 * (gamma + omega_span) / std::f64::consts::TAU).max(4_000.0);
    let mut n_steps = (t_max * steps_per_ps).ceil() as usize;
    if n_steps % 2 == 1 {
        n_steps += 1;
    }
    let dt = t_max / n_steps as f64;

    let vc = vectors.map(Complex64::from);
    let unitary = |tau: f64| -> DMatrix<Complex64> {
        let phases = DVector::from_fn(n, |k, _| Complex64::from_polar(1.0, -omega[k] * tau));
        let mut scaled = vc.clone();
        for k in 0..n {
            let p = phases[k];
            for r in 0..n {
                scaled[(r, k)] *= p;
            }
        }
        &scaled * vc.transpose()
    };

    // Integrand for all j at once: f_j(τ) = C(τ)·U(τ)·S_jρ·U(τ)†.
    let integrand = |tau: f64| -> Vec<DMatrix<Complex64>> {
        let u = unitary(tau);
        let udag = u.adjoint();
        let weight = c_tilde * (-gamma * tau).exp();
        (0..n)
            .map(|j| {
                let mut sj_rho = DMatrix::<Complex64>::zeros(n, n);
                for b in 0..n {
                    sj_rho[(j, b)] = rho[(j, b)];
                }
                (&u * sj_rho * &udag) * weight
            })
            .collect()
    };

    let mut acc: Vec<DMatrix<Complex64>> = integrand(0.0);
    for step in 1..n_steps {
        let coeff = if step % 2 == 1 { 4.0 } else { 2.0 };
        let fs = integrand(step as f64 * dt);
        for (a, f) in acc.iter_mut().zip(fs) {
            *a += f * Complex64::from(coeff);
        }
    }
    let fs_end = integrand(t_max);
    for (a, f) in acc.iter_mut().zip(fs_end) {
        *a += f;
        *a *= Complex64::from(dt / 3.0);
    }

    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for (j, m_j) in acc.iter().enumerate() {
        let d = m_j - m_j.adjoint();
        let mut sj_d = DMatrix::<Complex64>::zeros(n, n);
        let mut d_sj = DMatrix::<Complex64>::zeros(n, n);
        for b in 0..n {
            sj_d[(j, b)] = d[(j, b)];
            d_sj[(b, j)] = d[(b, j)];
        }
        out += sj_d - d_sj;
    }
    out
}

/// Literal recursive enumeration of every ordered sequence of distinct
/// intermediates with inverse-sum scoring; returns (intermediates, strength)
/// for all initial→…→trap paths.
pub fn brute_force_paths(
    h: &DMatrix<f64>,
    initial: usize,
    trap: usize,
) -> Vec<(Vec<usize>, f64)> {
    let n = h.nrows();
    let pool: Vec<usize> = (0..n).filter(|&j| j != initial && j != trap).collect();
    let mut paths = Vec::new();
    let mut prefix = Vec::new();
    walk(h, initial, trap, &pool, &mut prefix, &mut paths);
    paths
}

fn walk(
    h: &DMatrix<f64>,
    initial: usize,
    trap: usize,
    pool: &[usize],
    prefix: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
) {
    out.push((prefix.clone(), chain_strength(h, initial, trap, prefix)));
    for &site in pool {
        if prefix.contains(&site) {
            continue;
        }
        prefix.push(site);
        walk(h, initial, trap, pool, prefix, out);
        prefix.pop();
    }
}

fn chain_strength(h: &DMatrix<f64>, initial: usize, trap: usize, intermediates: &[usize]) -> f64 {
    let mut inv_sum = 0.0f64;
    let mut prev = initial;
    for &site in intermediates.iter().chain(std::iter::once(&trap)) {
        let link = h[(prev, site)].abs();
        if link == 0.0 {
            return 0.0;
        }
        inv_sum += 1.0 / link;
        prev = site;
    }
    1.0 / inv_sum
}

/// Max strength and strict `> threshold` count from the brute-force walk.
pub fn brute_force_metrics(
    h: &DMatrix<f64>,
    initial: usize,
    trap: usize,
    threshold: f64,
) -> (f64, usize) {
    let paths = brute_force_paths(h, initial, trap);
    let max = paths.iter().map(|(_, s)| *s).fold(0.0f64, f64::max);
    let count = paths.iter().filter(|(_, s)| *s > threshold).count();
    (max, count)
}

/// Random Hermitian PSD matrix with unit trace (a valid density matrix).
pub fn random_density(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let p = &g * g.adjoint();
    let trace: Complex64 = (0..n).map(|i| p[(i, i)]).sum();
    p / trace
}

/// Frobenius norm of the difference of two complex matrices.
pub fn frob_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Max entrywise modulus.
pub fn max_abs(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
