//! Physical constants and unit conversions.
//!
//! Internal convention: energies and couplings are stored in cm⁻¹ and
//! converted to angular frequency (rad/ps) at the point where dynamics are
//! assembled. Rates (`r_trap`, `r_loss`) are already ps⁻¹ and are never
//! converted. With everything in rad/ps, ħ drops out of the equations of
//! motion.

/// Boltzmann constant in cm⁻¹ per kelvin.
pub const K_B: f64 = 0.6950348;

/// Angular frequency per wavenumber: ω[rad/ps] = 2πc · E[cm⁻¹].
pub const RAD_PS_PER_CM: f64 = 0.1883652;

/// Minimum allowed chromophore separation in Å (validity floor of the
/// point-dipole approximation).
pub const MIN_DISTANCE: f64 = 5.0;

/// Default dipole-coupling prefactor C in cm⁻¹·Å³ (J = C·κ/r³).
pub const DEFAULT_COUPLING_CONST: f64 = 134_000.0;

/// Default site-energy disorder window in cm⁻¹ (uniform, centered at 0).
pub const DEFAULT_ENERGY_WINDOW: f64 = 500.0;

/// Default bath cutoff γ in cm⁻¹.
pub const DEFAULT_GAMMA: f64 = 50.0;

/// Default temperature in K.
pub const DEFAULT_TEMPERATURE: f64 = 298.0;

/// Default reorganization energy λ in cm⁻¹.
pub const DEFAULT_LAMBDA: f64 = 35.0;

/// Default trapping rate in ps⁻¹.
pub const DEFAULT_R_TRAP: f64 = 1.0;

/// Default per-site loss rate in ps⁻¹.
pub const DEFAULT_R_LOSS: f64 = 1e-3;

/// Default dominant-path strength threshold in cm⁻¹.
pub const DEFAULT_PATH_THRESHOLD: f64 = 1000.0;

/// Convert an energy in cm⁻¹ to angular frequency in rad/ps.
#[inline]
pub fn cm_to_rad_ps(energy_cm: f64) -> f64 {
    energy_cm * RAD_PS_PER_CM
}

/// Convert a squared energy in cm⁻² (correlation amplitude) to rad²/ps².
#[inline]
pub fn cm2_to_rad2_ps2(c_cm2: f64) -> f64 {
    c_cm2 * RAD_PS_PER_CM * RAD_PS_PER_CM
}
