//! Pump envelope and phase-matching kernel of the down-conversion source.

use serde::{Deserialize, Serialize};

use super::amplitude::{Complex64, JointSpectralAmplitude};
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::units::{self, FWHM_PER_SIGMA, SPEED_OF_LIGHT};

/// Crystal and pump parameters. All lengths are in metres.
///
/// `pump_waist` and `confocal_parameter` are carried as provenance only; the
/// spectral model does not depend on the transverse beam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub pump_center_wavelength: f64,
    pub pump_fwhm_bandwidth: f64,
    pub crystal_length: f64,
    pub poling_period: f64,
    pub group_index_pump: f64,
    pub group_index_signal: f64,
    pub group_index_idler: f64,
    /// Signed separation of the signal and idler center wavelengths
    /// (signal minus idler). Positive values move the signal to longer
    /// wavelength and the idler to shorter wavelength by half each.
    pub signal_center_offset: f64,
    /// Quadratic spectral phase of the pump in s² (φ(Ω) = chirp·Ω²).
    pub pump_chirp: f64,
    pub pump_waist: f64,
    pub confocal_parameter: f64,
}

impl Default for SourceConfig {
    /// 785 nm femtosecond pump into a 2 mm periodically poled KTP crystal.
    fn default() -> Self {
        Self {
            pump_center_wavelength: 785e-9,
            pump_fwhm_bandwidth: 5.35e-9,
            crystal_length: 2e-3,
            poling_period: 46.55e-6,
            group_index_pump: 1.7760,
            group_index_signal: 1.7320,
            group_index_idler: 1.8200,
            signal_center_offset: 0.0,
            pump_chirp: 0.0,
            pump_waist: 50e-6,
            confocal_parameter: 10e-3,
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pump_center_wavelength", self.pump_center_wavelength),
            ("pump_fwhm_bandwidth", self.pump_fwhm_bandwidth),
            ("crystal_length", self.crystal_length),
            ("poling_period", self.poling_period),
            ("group_index_pump", self.group_index_pump),
            ("group_index_signal", self.group_index_signal),
            ("group_index_idler", self.group_index_idler),
            ("pump_waist", self.pump_waist),
            ("confocal_parameter", self.confocal_parameter),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if !self.signal_center_offset.is_finite() {
            return Err(Error::config("signal_center_offset", "must be finite"));
        }
        if !self.pump_chirp.is_finite() {
            return Err(Error::config("pump_chirp", "must be finite"));
        }
        if self.pump_fwhm_bandwidth >= self.pump_center_wavelength {
            return Err(Error::config(
                "pump_fwhm_bandwidth",
                "must be smaller than the pump center wavelength",
            ));
        }
        Ok(())
    }

    pub fn pump_omega(&self) -> f64 {
        units::wavelength_to_omega(self.pump_center_wavelength)
    }

    /// Degenerate down-conversion wavelength (twice the pump wavelength).
    pub fn degenerate_wavelength(&self) -> f64 {
        2.0 * self.pump_center_wavelength
    }

    /// Pump intensity FWHM converted to angular frequency.
    pub fn pump_fwhm_omega(&self) -> f64 {
        units::dlambda_to_domega(self.pump_fwhm_bandwidth, self.pump_center_wavelength)
    }

    /// Phase-matched signal and idler center frequencies.
    pub fn center_omegas(&self) -> (f64, f64) {
        let deg = self.pump_omega() / 2.0;
        let shift = units::dlambda_to_domega(self.signal_center_offset, self.degenerate_wavelength());
        (deg - shift / 2.0, deg + shift / 2.0)
    }

    /// Default grid: `n`×`n` points spanning ±5 pump bandwidths around the
    /// degeneracy point on both axes.
    pub fn default_grid(&self, n: usize) -> Result<FrequencyGrid> {
        self.grid_with_span(n, 5.0)
    }

    pub fn grid_with_span(&self, n: usize, pump_bandwidths: f64) -> Result<FrequencyGrid> {
        self.validate()?;
        let deg = self.pump_omega() / 2.0;
        let half = pump_bandwidths * self.pump_fwhm_omega();
        FrequencyGrid::symmetric(n, deg - half, deg + half)
    }
}

/// Gaussian pump envelope α(ω_s + ω_i).
#[derive(Clone, Debug, PartialEq)]
pub struct PumpEnvelope {
    pub center: f64,
    /// RMS width of the pump *intensity* spectrum in angular frequency.
    pub intensity_sigma: f64,
    pub chirp: f64,
}

impl PumpEnvelope {
    /// Width σ_a of the amplitude, α = exp(−Ω²/(2σ_a²)); equals √2·σ_intensity.
    pub fn amplitude_sigma(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.intensity_sigma
    }

    pub fn value(&self, omega_sum: f64) -> Complex64 {
        let d = omega_sum - self.center;
        let sa = self.amplitude_sigma();
        let modulus = (-d * d / (2.0 * sa * sa)).exp();
        Complex64::from_polar(modulus, self.chirp * d * d)
    }
}

pub fn build_pump_envelope(cfg: &SourceConfig, grid: &FrequencyGrid) -> Result<PumpEnvelope> {
    cfg.validate()?;
    let env = PumpEnvelope {
        center: cfg.pump_omega(),
        intensity_sigma: cfg.pump_fwhm_omega() / FWHM_PER_SIGMA,
        chirp: cfg.pump_chirp,
    };
    let (s0, s1) = grid.signal_bounds();
    let (i0, i1) = grid.idler_bounds();
    let nearest = env.center.clamp(s0 + i0, s1 + i1);
    if env.value(nearest).norm() < 1e-300 {
        return Err(Error::DegenerateEnvelope);
    }
    Ok(env)
}

/// First-order (group-index) phase-matching kernel sinc(Δk·L/2)·exp(iΔk·L/2).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatching {
    pub crystal_length: f64,
    pub group_index_pump: f64,
    pub group_index_signal: f64,
    pub group_index_idler: f64,
    pub signal_center: f64,
    pub idler_center: f64,
}

impl PhaseMatching {
    /// Phase mismatch Δk (rad/m), expanded to first order about the
    /// phase-matched point. The poling term cancels there by construction.
    pub fn delta_k(&self, omega_s: f64, omega_i: f64) -> f64 {
        let ds = omega_s - self.signal_center;
        let di = omega_i - self.idler_center;
        ((self.group_index_pump - self.group_index_signal) * ds + (self.group_index_pump - self.group_index_idler) * di)
            / SPEED_OF_LIGHT
    }

    pub fn value(&self, omega_s: f64, omega_i: f64) -> Complex64 {
        let x = 0.5 * self.delta_k(omega_s, omega_i) * self.crystal_length;
        Complex64::from_polar(sinc(x), x)
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub fn build_phase_matching(cfg: &SourceConfig, _grid: &FrequencyGrid) -> Result<PhaseMatching> {
    cfg.validate()?;
    let (signal_center, idler_center) = cfg.center_omegas();
    Ok(PhaseMatching {
        crystal_length: cfg.crystal_length,
        group_index_pump: cfg.group_index_pump,
        group_index_signal: cfg.group_index_signal,
        group_index_idler: cfg.group_index_idler,
        signal_center,
        idler_center,
    })
}

/// Ψ = normalize(α(ω_s+ω_i)·φ(ω_s, ω_i)).
pub fn build_jsa(cfg: &SourceConfig, grid: &FrequencyGrid) -> Result<JointSpectralAmplitude> {
    let pump = build_pump_envelope(cfg, grid)?;
    let pm = build_phase_matching(cfg, grid)?;
    JointSpectralAmplitude::from_fn(grid.clone(), |ws, wi| pump.value(ws + wi) * pm.value(ws, wi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_peak_and_half_intensity() {
        let cfg = SourceConfig::default();
        let grid = cfg.default_grid(64).unwrap();
        let env = build_pump_envelope(&cfg, &grid).unwrap();
        assert!((env.value(env.center).norm() - 1.0).abs() < 1e-15);
        let half = cfg.pump_fwhm_omega() / 2.0;
        for d in [half, -half] {
            let a = env.value(env.center + d).norm();
            assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((a * a - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_outside_grid_is_degenerate() {
        let cfg = SourceConfig::default();
        // A grid near 3000 nm puts ω_s + ω_i far below the pump frequency.
        let w = units::wavelength_to_omega(3000e-9);
        let grid = FrequencyGrid::symmetric(16, w * 0.99, w * 1.01).unwrap();
        assert!(matches!(
            build_pump_envelope(&cfg, &grid),
            Err(Error::DegenerateEnvelope)
        ));
    }

    #[test]
    fn phase_matching_peak_and_first_zero() {
        let cfg = SourceConfig::default();
        let grid = cfg.default_grid(32).unwrap();
        let pm = build_phase_matching(&cfg, &grid).unwrap();
        let (s0, i0) = cfg.center_omegas();
        assert!((pm.value(s0, i0).norm() - 1.0).abs() < 1e-15);
        // Move the signal until Δk·L/2 = π.
        let slope = (cfg.group_index_pump - cfg.group_index_signal) / SPEED_OF_LIGHT;
        let d = 2.0 * std::f64::consts::PI / (slope * cfg.crystal_length);
        let x = 0.5 * pm.delta_k(s0 + d, i0) * cfg.crystal_length;
        assert!((x - std::f64::consts::PI).abs() < 1e-9);
        assert!(pm.value(s0 + d, i0).norm() < 1e-12);
    }

    #[test]
    fn config_validation_names_key() {
        let cfg = SourceConfig {
            crystal_length: -1.0,
            ..SourceConfig::default()
        };
        match cfg.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "crystal_length"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = SourceConfig {
            pump_fwhm_bandwidth: 900e-9,
            ..SourceConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
