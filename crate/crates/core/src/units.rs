//! Physical constants and wavelength/frequency conversions.
//!
//! Internally, spectral quantities use SI angular frequency (rad/s) and
//! wavelengths in metres; file formats and reports use nm, ps and Hz.

use std::f64::consts::PI;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ratio between the FWHM and the standard deviation of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;

pub const NM: f64 = 1e-9;
pub const PS: f64 = 1e-12;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda` (m).
pub fn wavelength_to_omega(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Vacuum wavelength (m) of light with angular frequency `omega` (rad/s).
pub fn omega_to_wavelength(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// Converts a small wavelength interval `dlambda` around `lambda` into an
/// angular-frequency interval.
pub fn dlambda_to_domega(dlambda: f64, lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * dlambda / (lambda * lambda)
}

pub fn domega_to_dlambda(domega: f64, lambda: f64) -> f64 {
    domega * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
}

/// Converts a frequency bandwidth (Hz) at `lambda` into a wavelength bandwidth.
pub fn dnu_to_dlambda(dnu: f64, lambda: f64) -> f64 {
    dnu * lambda * lambda / SPEED_OF_LIGHT
}
