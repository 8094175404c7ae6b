//! Physical constants (SI, exact where CODATA defines them) and unit helpers.

use std::f64::consts::PI;

pub const H: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = H / (2.0 * PI);
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const K_B: f64 = 1.380_649e-23;
pub const C_LIGHT: f64 = 299_792_458.0;
/// Flux quantum h/2e.
pub const PHI0: f64 = H / (2.0 * E_CHARGE);
/// Resistance quantum h/e².
pub const R_K: f64 = H / (E_CHARGE * E_CHARGE);
/// Impedance of free space.
pub const Z_VAC: f64 = 376.730_313_412;

/// Linear frequency (Hz) to angular (rad/s).
#[inline]
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

#[inline]
pub fn mhz(f: f64) -> f64 {
    hz(f * 1e6)
}

#[inline]
pub fn ghz(f: f64) -> f64 {
    hz(f * 1e9)
}

/// Angular frequency back to Hz.
#[inline]
pub fn to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
