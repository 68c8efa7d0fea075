//! Drude-Lorentz bath model: exponential high-temperature correlation
//! function, spectral density, and mean phonon energy.

use crate::constants::K_B;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Bath parameters shared by every site: reorganization energy λ (cm⁻¹),
/// cutoff / relaxation rate γ (cm⁻¹), temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub lambda: f64,
    pub gamma: f64,
    pub temperature: f64,
}

impl BathSpec {
    pub fn new(lambda: f64, gamma: f64, temperature: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!("lambda must be ≥ 0, got {lambda}")));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        Ok(Self {
            lambda,
            gamma,
            temperature,
        })
    }
}

/// Amplitude c of the exponential correlation C(t) = c·e^{−γ|t|}:
/// c = λ(2k_BT − iγ) in cm⁻².
pub fn correlation_amplitude(b: &BathSpec) -> Complex64 {
    b.lambda * Complex64::new(2.0 * K_B * b.temperature, -b.gamma)
}

/// Drude-Lorentz spectral density J(ω) = (2/π)·λγω/(ω² + γ²) in cm⁻¹,
/// normalized so that ∫₀^∞ J(ω)/ω dω = λ.
pub fn spectral_density(b: &BathSpec, omega: f64) -> f64 {
    (2.0 / std::f64::consts::PI) * b.lambda * b.gamma * omega / (omega * omega + b.gamma * b.gamma)
}

fn bose(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// Adaptive Simpson quadrature; returns (integral, achieved error estimate).
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let err = (left + right - whole) / 15.0;
        if err.abs() <= tol || depth >= 50 {
            return (left + right + err, err.abs());
        }
        let (li, le) = recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth + 1);
        let (ri, re) = recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth + 1);
        (li + ri, le + re)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 0)
}

/// Thermal mean phonon energy ∫J(ω)·ω·n(ω)dω / ∫J(ω)·n(ω)dω in cm⁻¹, with
/// n the Bose factor. Quadrature runs on [10⁻⁶γ, Ω_max] where Ω_max is grown
/// until the tail contributes < 10⁻⁶ relative to both integrals.
pub fn mean_phonon_energy(b: &BathSpec) -> Result<f64> {
    // λ cancels in the ratio; evaluate with λ = 1 so λ = 0 still works.
    let unit = BathSpec {
        lambda: 1.0,
        ..*b
    };
    let beta = 1.0 / (K_B * b.temperature);
    let num = move |w: f64| spectral_density(&unit, w) * w * bose(beta, w);
    let den = move |w: f64| spectral_density(&unit, w) * bose(beta, w);

    let eps = 1e-6 * b.gamma;
    let mut omega_max = 40.0 * b.gamma.max(1.0 / beta);
    let tol = 1e-10;
    let (mut num_total, mut num_err) = adaptive_simpson(&num, eps, omega_max, tol);
    let (mut den_total, mut den_err) = adaptive_simpson(&den, eps, omega_max, tol);
    let mut converged = false;
    for _ in 0..40 {
        let (num_tail, ne) = adaptive_simpson(&num, omega_max, 2.0 * omega_max, tol);
        let (den_tail, de) = adaptive_simpson(&den, omega_max, 2.0 * omega_max, tol);
        num_total += num_tail;
        den_total += den_tail;
        num_err += ne;
        den_err += de;
        omega_max *= 2.0;
        if num_tail.abs() < 1e-6 * num_total.abs() && den_tail.abs() < 1e-6 * den_total.abs() {
            converged = true;
            break;
        }
    }
    let achieved = (num_err / num_total.abs()).max(den_err / den_total.abs());
    if !converged || !achieved.is_finite() || achieved > 1e-6 {
        return Err(Error::QuadratureNonConvergence {
            achieved,
            requested: 1e-6,
        });
    }
    Ok(num_total / den_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(lambda: f64, gamma: f64, t: f64) -> BathSpec {
        BathSpec::new(lambda, gamma, t).unwrap()
    }

    #[test]
    fn zero_lambda_means_zero_correlation() {
        let c = correlation_amplitude(&spec(0.0, 50.0, 298.0));
        assert_eq!(c, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn correlation_amplitude_at_reference_parameters() {
        let c = correlation_amplitude(&spec(35.0, 50.0, 298.0));
        assert_relative_eq!(c.re, 35.0 * 2.0 * K_B * 298.0, epsilon = 1e-12);
        assert!((c.re - 14498.4).abs() < 0.1, "Re c = {}", c.re);
        assert_relative_eq!(c.im, -1750.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_amplitude_is_linear_in_lambda() {
        let c1 = correlation_amplitude(&spec(35.0, 50.0, 298.0));
        let c10 = correlation_amplitude(&spec(350.0, 50.0, 298.0));
        assert_relative_eq!(c10.re / c1.re, 10.0, epsilon = 1e-14);
        assert_relative_eq!(c10.im / c1.im, 10.0, epsilon = 1e-14);
    }

    #[test]
    fn real_part_vanishes_at_low_temperature_imaginary_fixed() {
        let hot = correlation_amplitude(&spec(35.0, 50.0, 298.0));
        let cold = correlation_amplitude(&spec(35.0, 50.0, 1e-9));
        assert!(cold.re.abs() < 1e-6 * hot.re.abs());
        assert_relative_eq!(cold.im, hot.im, epsilon = 1e-12);
    }

    #[test]
    fn spectral_density_endpoints() {
        let b = spec(35.0, 50.0, 298.0);
        assert_eq!(spectral_density(&b, 0.0), 0.0);
        assert_relative_eq!(
            spectral_density(&b, 50.0),
            35.0 / std::f64::consts::PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn reorganization_energy_recovered_by_quadrature() {
        let b = spec(35.0, 50.0, 298.0);
        let f = |w: f64| spectral_density(&b, w) / w;
        let (integral, _) = adaptive_simpson(&f, 1e-8 * b.gamma, 1e4 * b.gamma, 1e-9);
        assert!(
            (integral - b.lambda).abs() < 1e-3 * b.lambda,
            "∫J/ω = {integral}, λ = {}",
            b.lambda
        );
    }

    #[test]
    fn mean_phonon_energy_at_room_temperature() {
        let e = mean_phonon_energy(&spec(35.0, 50.0, 298.0)).unwrap();
        assert!((e - 64.0).abs() < 2.0, "mean phonon energy {e}");
    }

    #[test]
    fn mean_phonon_energy_is_lambda_independent() {
        let a = mean_phonon_energy(&spec(35.0, 50.0, 298.0)).unwrap();
        let b = mean_phonon_energy(&spec(350.0, 50.0, 298.0)).unwrap();
        let c = mean_phonon_energy(&spec(0.0, 50.0, 298.0)).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-9);
        assert_relative_eq!(a, c, epsilon = 1e-9);
    }

    /// Romberg (trapezoid-refinement) integrator, independent of the
    /// adaptive-Simpson route used by the implementation.
    fn romberg(f: &dyn Fn(f64) -> f64, a: f64, b: f64, levels: usize) -> f64 {
        let mut r = vec![vec![0.0f64; levels]; levels];
        r[0][0] = 0.5 * (b - a) * (f(a) + f(b));
        for i in 1..levels {
            let n = 1usize << i;
            let h = (b - a) / n as f64;
            let mut s = 0.0;
            for k in (1..n).step_by(2) {
                s += f(a + k as f64 * h);
            }
            r[i][0] = 0.5 * r[i - 1][0] + h * s;
            for j in 1..=i {
                let factor = 4f64.powi(j as i32);
                r[i][j] = (factor * r[i][j - 1] - r[i - 1][j - 1]) / (factor - 1.0);
            }
        }
        r[levels - 1][levels - 1]
    }

    #[test]
    fn mean_phonon_energy_matches_romberg_oracle_at_150k() {
        let b = spec(35.0, 50.0, 150.0);
        let e = mean_phonon_energy(&b).unwrap();
        let beta = 1.0 / (K_B * 150.0);
        let num = |w: f64| spectral_density(&b, w) * w * bose(beta, w);
        let den = |w: f64| spectral_density(&b, w) * bose(beta, w);
        let (a, hi) = (1e-6 * b.gamma, 6000.0);
        let oracle = romberg(&num, a, hi, 18) / romberg(&den, a, hi, 18);
        assert!(
            (e - oracle).abs() < 0.005 * oracle,
            "implementation {e} vs Romberg oracle {oracle}"
        );
    }

    #[test]
    fn mean_phonon_energy_increases_with_temperature() {
        let mut last = 0.0;
        for t in [100.0, 200.0, 298.0, 400.0] {
            let e = mean_phonon_energy(&spec(35.0, 50.0, t)).unwrap();
            assert!(e > last, "T={t}: {e} not > {last}");
            last = e;
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(BathSpec::new(-1.0, 50.0, 298.0).is_err());
        assert!(BathSpec::new(35.0, 0.0, 298.0).is_err());
        assert!(BathSpec::new(35.0, 50.0, 0.0).is_err());
    }
}
