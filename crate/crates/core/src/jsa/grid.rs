use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform discretization of the signal and idler angular-frequency axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    n_s: usize,
    n_i: usize,
    signal: (f64, f64),
    idler: (f64, f64),
}

impl FrequencyGrid {
    pub fn new(n_s: usize, n_i: usize, signal: (f64, f64), idler: (f64, f64)) -> Result<Self> {
        if n_s < 2 || n_i < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points per axis, got {n_s}x{n_i}"
            )));
        }
        for (name, (lo, hi)) in [("signal", signal), ("idler", idler)] {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::InvalidArgument(format!(
                    "{name} axis bounds must satisfy min < max, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            n_s,
            n_i,
            signal,
            idler,
        })
    }

    /// Square grid with identical signal and idler axes.
    pub fn symmetric(n: usize, min: f64, max: f64) -> Result<Self> {
        Self::new(n, n, (min, max), (min, max))
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    pub fn signal_bounds(&self) -> (f64, f64) {
        self.signal
    }

    pub fn idler_bounds(&self) -> (f64, f64) {
        self.idler
    }

    pub fn ds(&self) -> f64 {
        (self.signal.1 - self.signal.0) / (self.n_s - 1) as f64
    }

    pub fn di(&self) -> f64 {
        (self.idler.1 - self.idler.0) / (self.n_i - 1) as f64
    }

    pub fn signal_omega(&self, j: usize) -> f64 {
        self.signal.0 + j as f64 * self.ds()
    }

    pub fn idler_omega(&self, k: usize) -> f64 {
        self.idler.0 + k as f64 * self.di()
    }

    pub fn signal_axis(&self) -> Vec<f64> {
        (0..self.n_s).map(|j| self.signal_omega(j)).collect()
    }

    pub fn idler_axis(&self) -> Vec<f64> {
        (0..self.n_i).map(|k| self.idler_omega(k)).collect()
    }

    /// Same bounds, `factor` times finer spacing per axis.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_s: (self.n_s - 1) * factor + 1,
            n_i: (self.n_i - 1) * factor + 1,
            ..self.clone()
        }
    }

    /// True when the signal and idler axes coincide point by point.
    pub fn is_exchange_symmetric(&self) -> bool {
        let tol = 1e-12 * self.signal.1.abs().max(1.0);
        self.n_s == self.n_i
            && (self.signal.0 - self.idler.0).abs() <= tol
            && (self.signal.1 - self.idler.1).abs() <= tol
    }
}
