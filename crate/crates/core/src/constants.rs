//! Physical constants (CODATA 2018, SI) and unit helpers.

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of a spectroscopic wavenumber given in cm^-1.
pub fn wavenumber_to_angular(cm_inv: f64) -> f64 {
    2.0 * PI * C * 100.0 * cm_inv
}

/// Angular frequency of a linear frequency in Hz.
pub fn hz_to_angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Angular bandwidth of a wavelength interval `dlambda` around `lambda` (both in m),
/// to first order in the wavelength-to-frequency map.
pub fn bandwidth_from_wavelength(dlambda: f64, lambda: f64) -> f64 {
    2.0 * PI * C * dlambda / (lambda * lambda)
}

/// Vacuum wavelength (m) of the sideband detuned by `omega` (rad/s) from a carrier at `lambda0`.
pub fn detuned_wavelength(lambda0: f64, omega: f64) -> f64 {
    2.0 * PI * C / (2.0 * PI * C / lambda0 + omega)
}
