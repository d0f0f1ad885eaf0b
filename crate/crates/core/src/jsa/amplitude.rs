use nalgebra::{Complex, DMatrix};

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Two-photon joint spectral amplitude Ψ(ω_s, ω_i) sampled on a grid,
/// indexed `[signal bin][idler bin]` and normalized so that
/// Σ|Ψ|²·Δω_s·Δω_i = 1.
#[derive(Clone, Debug)]
pub struct JointSpectralAmplitude {
    grid: FrequencyGrid,
    amplitude: DMatrix<Complex64>,
}

impl JointSpectralAmplitude {
    /// Normalizes `amplitude` onto `grid`.
    pub fn from_matrix(grid: FrequencyGrid, amplitude: DMatrix<Complex64>) -> Result<Self> {
        if amplitude.nrows() != grid.n_s() || amplitude.ncols() != grid.n_i() {
            return Err(Error::GridMismatch(format!(
                "matrix is {}x{}, grid is {}x{}",
                amplitude.nrows(),
                amplitude.ncols(),
                grid.n_s(),
                grid.n_i()
            )));
        }
        if amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("non-finite amplitude entry".into()));
        }
        let norm_sq = amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.ds() * grid.di();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::EmptyOverlap("normalization"));
        }
        let scale = 1.0 / norm_sq.sqrt();
        Ok(Self {
            grid,
            amplitude: amplitude.map(|z| z * scale),
        })
    }

    /// Samples an arbitrary kernel `f(ω_s, ω_i)` on the grid and normalizes it.
    pub fn from_fn<F>(grid: FrequencyGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let m = DMatrix::from_fn(grid.n_s(), grid.n_i(), |j, k| {
            f(grid.signal_omega(j), grid.idler_omega(k))
        });
        Self::from_matrix(grid, m)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &DMatrix<Complex64> {
        &self.amplitude
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.ds() * self.grid.di()
    }

    /// Elementwise modulus |Ψ| as a (renormalized) amplitude with zero phase.
    pub fn modulus(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            amplitude: self.amplitude.map(|z| Complex64::new(z.norm(), 0.0)),
        }
    }

    /// Joint spectral probability density |Ψ(ω_s, ω_i)|².
    pub fn joint_intensity(&self) -> DMatrix<f64> {
        self.amplitude.map(|z| z.norm_sqr())
    }

    /// Joint probability per grid cell, |Ψ|²·Δω_s·Δω_i (sums to one).
    pub fn cell_probabilities(&self) -> DMatrix<f64> {
        let w = self.grid.ds() * self.grid.di();
        self.amplitude.map(|z| z.norm_sqr() * w)
    }

    /// Multiplies the amplitude by per-axis factors without renormalizing.
    pub(crate) fn scaled_by_axes(&self, signal: &[f64], idler: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.grid.n_s(), self.grid.n_i(), |j, k| {
            self.amplitude[(j, k)] * (signal[j] * idler[k])
        })
    }

    /// Frobenius distance between two amplitudes on the same grid, including
    /// quadrature weights.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("amplitudes live on different grids".into()));
        }
        let w = self.grid.ds() * self.grid.di();
        Ok(((&self.amplitude - &other.amplitude).norm_squared() * w).sqrt())
    }
}
