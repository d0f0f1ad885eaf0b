//! Joint spectral amplitude of the pair source and everything derived from it.

mod amplitude;
mod filter;
mod grid;
mod hom;
mod schmidt;
mod source;
mod spectra;

pub use amplitude::{Complex64, JointSpectralAmplitude};
pub use filter::{apply_filter, pair_transmission, FilterShape, ModeTransmissions, SpectralFilter};
pub use grid::FrequencyGrid;
pub use hom::{delay_scan, hom_curve, indistinguishability, max_unaliased_delay, HomCurve};
pub use schmidt::{
    effective_mode_number, effective_mode_number_of_matrix, k_abs, schmidt_decompose, SchmidtDecomposition,
};
pub use source::{
    build_jsa, build_phase_matching, build_pump_envelope, sinc, PhaseMatching, PumpEnvelope, SourceConfig,
};
pub use spectra::{marginal_spectra, overlap_integral, Spectrum};
