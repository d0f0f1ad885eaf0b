//! Dispersive-fiber time-of-flight spectrometer.

mod detector;
mod dispersion;

pub use detector::{resolution, DetectorModel};
pub use dispersion::{
    fiber_group_delay, fiber_slope_for, fit_dispersion, Branch, DispersionModel, REFERENCE_WAVELENGTH_NM,
};
