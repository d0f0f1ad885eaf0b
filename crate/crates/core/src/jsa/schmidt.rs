//! Schmidt decomposition of a joint spectral amplitude and the effective
//! mode number derived from it.

use nalgebra::DMatrix;

use super::amplitude::{Complex64, JointSpectralAmplitude};
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};

/// Weights λ_n (descending, summing to one) with paired mode functions.
///
/// Column `n` of `signal_modes` holds ψ_n sampled on the signal axis and is
/// normalized so that Σ_j |ψ_n(ω_j)|² Δω_s = 1; likewise for `idler_modes`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    grid: FrequencyGrid,
    weights: Vec<f64>,
    signal_modes: DMatrix<Complex64>,
    idler_modes: DMatrix<Complex64>,
}

impl SchmidtDecomposition {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn signal_modes(&self) -> &DMatrix<Complex64> {
        &self.signal_modes
    }

    pub fn idler_modes(&self) -> &DMatrix<Complex64> {
        &self.idler_modes
    }

    pub fn signal_mode(&self, n: usize) -> Vec<Complex64> {
        self.signal_modes.column(n).iter().copied().collect()
    }

    pub fn idler_mode(&self, n: usize) -> Vec<Complex64> {
        self.idler_modes.column(n).iter().copied().collect()
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn effective_mode_number(&self) -> Result<f64> {
        effective_mode_number(&self.weights)
    }

    /// Σ_n √λ_n ψ_n(ω_s) φ_n(ω_i) on the original grid.
    pub fn reconstruct(&self) -> Result<JointSpectralAmplitude> {
        let scaled = DMatrix::from_fn(self.signal_modes.nrows(), self.weights.len(), |j, n| {
            self.signal_modes[(j, n)] * self.weights[n].sqrt()
        });
        let m = scaled * self.idler_modes.transpose();
        JointSpectralAmplitude::from_matrix(self.grid.clone(), m)
    }

    /// Smallest number of leading modes whose weights sum to `1 - tail`.
    pub fn modes_for_tail(&self, tail: f64) -> usize {
        let mut acc = 0.0;
        for (n, w) in self.weights.iter().enumerate() {
            acc += w;
            if acc >= 1.0 - tail {
                return n + 1;
            }
        }
        self.weights.len()
    }
}

/// K = (Σ λ_n²)⁻¹.
pub fn effective_mode_number(weights: &[f64]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Numeric(
            "Schmidt weights must be non-negative with positive sum".into(),
        ));
    }
    let purity: f64 = weights.iter().map(|w| (w / total).powi(2)).sum();
    Ok(1.0 / purity)
}

/// Singular value decomposition of the amplitude with quadrature weights
/// folded in. Modes come back in descending-weight order, and each signal
/// mode has its first significant component real and positive.
pub fn schmidt_decompose(jsa: &JointSpectralAmplitude) -> Result<SchmidtDecomposition> {
    let grid = jsa.grid().clone();
    let (ds, di) = (grid.ds(), grid.di());
    let m = jsa.amplitude() * Complex64::new((ds * di).sqrt(), 0.0);
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite amplitude".into()));
    }
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numeric("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD did not return Vᴴ".into()))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let total: f64 = sv.iter().map(|s| s * s).sum();
    if !(total > 0.0) {
        return Err(Error::Numeric("zero singular values".into()));
    }

    let r = order.len();
    let mut signal_modes = DMatrix::<Complex64>::zeros(grid.n_s(), r);
    let mut idler_modes = DMatrix::<Complex64>::zeros(grid.n_i(), r);
    let mut weights = Vec::with_capacity(r);
    let (sig_scale, idl_scale) = (1.0 / ds.sqrt(), 1.0 / di.sqrt());

    for (n, &src) in order.iter().enumerate() {
        weights.push(sv[src] * sv[src] / total);
        let col = u.column(src);
        let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let phase = col
            .iter()
            .find(|z| z.norm() > 1e-10 * peak)
            .map(|z| z / z.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        let undo = phase.conj();
        for j in 0..grid.n_s() {
            signal_modes[(j, n)] = col[j] * undo * sig_scale;
        }
        // M = Σ σ U Vᴴ, so the idler function is row `src` of Vᴴ.
        for k in 0..grid.n_i() {
            idler_modes[(k, n)] = v_t[(src, k)] * phase * idl_scale;
        }
    }

    Ok(SchmidtDecomposition {
        grid,
        weights,
        signal_modes,
        idler_modes,
    })
}

/// K_ABS: effective mode number of the Schmidt decomposition of |Ψ|.
pub fn k_abs(jsa: &JointSpectralAmplitude) -> Result<f64> {
    schmidt_decompose(&jsa.modulus())?.effective_mode_number()
}

/// Effective mode number of a real matrix (rows = signal bins) without a
/// full SVD: K = ‖M‖_F⁴ / ‖M Mᵀ‖_F².
///
/// Used on histogram amplitudes √counts where the bin widths are already
/// folded into the counts.
pub fn effective_mode_number_of_matrix(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let norm_sq = m.norm_squared();
    if !(norm_sq > 0.0) {
        return Err(Error::Numeric("all-zero matrix".into()));
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    Ok(norm_sq * norm_sq / gram.norm_squared())
}
