use nalgebra::DMatrix;
use serde::Serialize;

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::units::omega_to_wavelength;

/// Intensity spectrum on a uniform angular-frequency axis, normalized so
/// that Σ values·spacing = 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub start: f64,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn new(start: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numeric("spectrum values must be finite and non-negative".into()));
        }
        let total: f64 = values.iter().sum::<f64>() * spacing;
        if !(total > 0.0) {
            return Err(Error::Numeric("all-zero spectrum".into()));
        }
        Ok(Self {
            start,
            spacing,
            values: values.into_iter().map(|v| v / total).collect(),
        })
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = j;
            }
        }
        best
    }

    /// Mean angular frequency Σ ω·S(ω)·Δω.
    pub fn centroid(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| self.omega(j) * v * self.spacing)
            .sum()
    }

    pub fn centroid_wavelength(&self) -> f64 {
        omega_to_wavelength(self.centroid())
    }

    /// Full width at half maximum in angular frequency, with linear
    /// interpolation of the half-maximum crossings.
    pub fn fwhm(&self) -> f64 {
        let (lo, hi) = self.half_max_crossings();
        hi - lo
    }

    /// FWHM expressed in wavelength.
    pub fn fwhm_wavelength(&self) -> f64 {
        let (lo, hi) = self.half_max_crossings();
        omega_to_wavelength(lo) - omega_to_wavelength(hi)
    }

    fn half_max_crossings(&self) -> (f64, f64) {
        let p = self.peak_index();
        let half = self.values[p] / 2.0;
        let v = &self.values;
        let mut lo = self.omega(0);
        for j in (0..p).rev() {
            if v[j] <= half {
                let f = (half - v[j]) / (v[j + 1] - v[j]);
                lo = self.omega(j) + f * self.spacing;
                break;
            }
        }
        let mut hi = self.omega(v.len() - 1);
        for j in p + 1..v.len() {
            if v[j] <= half {
                let f = (v[j - 1] - half) / (v[j - 1] - v[j]);
                hi = self.omega(j - 1) + f * self.spacing;
                break;
            }
        }
        (lo, hi)
    }

    fn same_axis(&self, other: &Self) -> bool {
        let tol = 1e-9 * self.spacing.abs();
        self.values.len() == other.values.len()
            && (self.start - other.start).abs() <= tol * self.values.len() as f64
            && (self.spacing - other.spacing).abs() <= tol
    }
}

/// Signal and idler marginals of a non-negative joint spectral density.
pub fn marginal_spectra(grid: &FrequencyGrid, jsp: &DMatrix<f64>) -> Result<(Spectrum, Spectrum)> {
    if jsp.nrows() != grid.n_s() || jsp.ncols() != grid.n_i() {
        return Err(Error::GridMismatch("joint spectrum does not match grid".into()));
    }
    if jsp.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Numeric("joint spectrum must be finite and non-negative".into()));
    }
    let signal: Vec<f64> = jsp.row_iter().map(|r| r.sum() * grid.di()).collect();
    let idler: Vec<f64> = jsp.column_iter().map(|c| c.sum() * grid.ds()).collect();
    Ok((
        Spectrum::new(grid.signal_bounds().0, grid.ds(), signal)?,
        Spectrum::new(grid.idler_bounds().0, grid.di(), idler)?,
    ))
}

/// |∫ √S_a(ω) √S_b(ω) dω|² for two spectra on the same axis.
pub fn overlap_integral(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if !a.same_axis(b) {
        return Err(Error::GridMismatch("spectra live on different axes".into()));
    }
    let inner: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x * y).sqrt()).sum::<f64>() * a.spacing;
    Ok((inner * inner).min(1.0))
}
