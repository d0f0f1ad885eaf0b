use serde::{Deserialize, Serialize};

use super::amplitude::JointSpectralAmplitude;
use super::grid::FrequencyGrid;
use super::schmidt::schmidt_decompose;
use crate::error::{Error, Result};
use crate::units::{omega_to_wavelength, NM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    TopHat,
    Gaussian,
    /// (wavelength m, intensity transmission) pairs, sorted by wavelength.
    /// Linear interpolation inside the table, end values held outside.
    Tabulated(Vec<(f64, f64)>),
}

/// Intensity transmission T(λ) of a spectral filter.
///
/// `bandwidth` is the full width for a top-hat and the FWHM for a Gaussian;
/// it is ignored for tabulated filters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub shape: FilterShape,
    pub center_wavelength: f64,
    pub bandwidth: f64,
}

impl SpectralFilter {
    pub fn top_hat(center_wavelength: f64, bandwidth: f64) -> Self {
        Self {
            shape: FilterShape::TopHat,
            center_wavelength,
            bandwidth,
        }
    }

    pub fn gaussian(center_wavelength: f64, fwhm: f64) -> Self {
        Self {
            shape: FilterShape::Gaussian,
            center_wavelength,
            bandwidth: fwhm,
        }
    }

    pub fn tabulated(table: Vec<(f64, f64)>) -> Result<Self> {
        let center = table.first().map(|p| p.0).unwrap_or(0.0);
        let f = Self {
            shape: FilterShape::Tabulated(table),
            center_wavelength: center.max(f64::MIN_POSITIVE),
            bandwidth: 1.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn all_pass() -> Self {
        Self {
            shape: FilterShape::Tabulated(vec![(1e-9, 1.0), (1.0, 1.0)]),
            center_wavelength: 1e-9,
            bandwidth: 1.0,
        }
    }

    /// The 8.6 nm top-hat centred at 1570 nm.
    pub fn standard_top_hat() -> Self {
        Self::top_hat(1570.0 * NM, 8.6 * NM)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            FilterShape::Tabulated(table) => {
                if table.is_empty() {
                    return Err(Error::config("table", "tabulated filter needs at least one point"));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::config("table", "wavelengths must be strictly increasing"));
                }
                if let Some(bad) = table.iter().find(|p| !(0.0..=1.0).contains(&p.1)) {
                    return Err(Error::config("table", format!("transmission {} outside [0, 1]", bad.1)));
                }
            }
            _ => {
                if !(self.center_wavelength > 0.0 && self.center_wavelength.is_finite()) {
                    return Err(Error::config("center_wavelength", "must be positive"));
                }
                if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
                    return Err(Error::config("bandwidth", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Pointwise transmission. A top-hat edge transmits one half.
    pub fn transmission(&self, wavelength: f64) -> f64 {
        match &self.shape {
            FilterShape::TopHat => {
                let d = (wavelength - self.center_wavelength).abs();
                let half = self.bandwidth / 2.0;
                if d < half {
                    1.0
                } else if d == half {
                    0.5
                } else {
                    0.0
                }
            }
            FilterShape::Gaussian => {
                let d = wavelength - self.center_wavelength;
                (-4.0 * std::f64::consts::LN_2 * d * d / (self.bandwidth * self.bandwidth)).exp()
            }
            FilterShape::Tabulated(table) => interpolate(table, wavelength),
        }
    }

    /// Transmission of each grid bin on a uniform angular-frequency axis.
    ///
    /// Top-hat bins are 1 when fully inside the pass band, 0 when fully
    /// outside and exactly 0.5 when a band edge falls inside the bin.
    pub fn transmission_on_axis(&self, omegas: &[f64], spacing: f64) -> Vec<f64> {
        omegas
            .iter()
            .map(|&w| match self.shape {
                FilterShape::TopHat => {
                    let long = omega_to_wavelength(w - spacing / 2.0);
                    let short = omega_to_wavelength(w + spacing / 2.0);
                    let lo = self.center_wavelength - self.bandwidth / 2.0;
                    let hi = self.center_wavelength + self.bandwidth / 2.0;
                    if short >= lo && long <= hi {
                        1.0
                    } else if long < lo || short > hi {
                        0.0
                    } else {
                        0.5
                    }
                }
                _ => self.transmission(omega_to_wavelength(w)),
            })
            .collect()
    }

    pub fn signal_transmissions(&self, grid: &FrequencyGrid) -> Vec<f64> {
        self.transmission_on_axis(&grid.signal_axis(), grid.ds())
    }

    pub fn idler_transmissions(&self, grid: &FrequencyGrid) -> Vec<f64> {
        self.transmission_on_axis(&grid.idler_axis(), grid.di())
    }
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = table.partition_point(|p| p.0 <= x);
    let (a, b) = (table[i - 1], table[i]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// Intensity transmission of each Schmidt mode of the unfiltered state.
#[derive(Clone, Debug, Serialize)]
pub struct ModeTransmissions {
    pub weights: Vec<f64>,
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
}

impl ModeTransmissions {
    pub fn main_signal(&self) -> f64 {
        self.signal[0]
    }

    pub fn main_idler(&self) -> f64 {
        self.idler[0]
    }

    /// Weight-averaged transmission of all modes beyond the first.
    pub fn higher_order_signal(&self) -> f64 {
        weighted_tail(&self.weights, &self.signal)
    }

    pub fn higher_order_idler(&self) -> f64 {
        weighted_tail(&self.weights, &self.idler)
    }
}

fn weighted_tail(weights: &[f64], t: &[f64]) -> f64 {
    let total: f64 = weights[1..].iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    weights[1..].iter().zip(&t[1..]).map(|(w, t)| w * t).sum::<f64>() / total
}

/// Applies amplitude transmission √T on each axis and renormalizes. The
/// per-mode transmissions refer to the decomposition of the input state.
pub fn apply_filter(
    jsa: &JointSpectralAmplitude,
    filter_s: &SpectralFilter,
    filter_i: &SpectralFilter,
) -> Result<(JointSpectralAmplitude, ModeTransmissions)> {
    filter_s.validate()?;
    filter_i.validate()?;
    let grid = jsa.grid();
    let ts = filter_s.signal_transmissions(grid);
    let ti = filter_i.idler_transmissions(grid);

    let dec = schmidt_decompose(jsa)?;
    let mode_t = |modes: &nalgebra::DMatrix<_>, t: &[f64], dw: f64| -> Vec<f64> {
        (0..dec.rank())
            .map(|n| {
                modes
                    .column(n)
                    .iter()
                    .zip(t)
                    .map(|(z, t): (&super::amplitude::Complex64, &f64)| z.norm_sqr() * t * dw)
                    .sum()
            })
            .collect()
    };
    let transmissions = ModeTransmissions {
        weights: dec.weights().to_vec(),
        signal: mode_t(dec.signal_modes(), &ts, grid.ds()),
        idler: mode_t(dec.idler_modes(), &ti, grid.di()),
    };

    let sqrt_s: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
    let sqrt_i: Vec<f64> = ti.iter().map(|t| t.sqrt()).collect();
    let m = jsa.scaled_by_axes(&sqrt_s, &sqrt_i);
    let kept = m.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.ds() * grid.di();
    if kept < 1e-12 {
        return Err(Error::EmptyOverlap("filtering"));
    }
    let filtered = JointSpectralAmplitude::from_matrix(grid.clone(), m)?;
    Ok((filtered, transmissions))
}

/// Probability that both photons of a pair pass their filters.
pub fn pair_transmission(jsa: &JointSpectralAmplitude, filter_s: &SpectralFilter, filter_i: &SpectralFilter) -> f64 {
    let grid = jsa.grid();
    let ts = filter_s.signal_transmissions(grid);
    let ti = filter_i.idler_transmissions(grid);
    let p = jsa.cell_probabilities();
    let mut acc = 0.0;
    for j in 0..grid.n_s() {
        for k in 0..grid.n_i() {
            acc += p[(j, k)] * ts[j] * ti[k];
        }
    }
    acc
}
