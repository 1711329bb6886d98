//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Every constant used anywhere in the crate lives here.

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Hartree energy expressed as a wavenumber, cm⁻¹.
pub const HARTREE_CM1: f64 = 219_474.631_363_2;

/// Atomic unit of electric dipole moment (e·a₀), C·m.
pub const DIPOLE_AU: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_rad(f_mhz: f64) -> f64 {
    2.0 * PI * 1e6 * f_mhz
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn rad_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

pub fn dipole_au_to_si(mu_au: f64) -> f64 {
    mu_au * DIPOLE_AU
}

pub fn dipole_si_to_au(mu_si: f64) -> f64 {
    mu_si / DIPOLE_AU
}
