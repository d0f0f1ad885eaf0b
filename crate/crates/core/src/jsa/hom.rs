use rayon::prelude::*;
use serde::Serialize;

use super::amplitude::{Complex64, JointSpectralAmplitude};
use crate::error::{Error, Result};

/// Single-pair coincidence probability at each delay.
#[derive(Clone, Debug, Serialize)]
pub struct HomCurve {
    /// Delays in seconds.
    pub delays: Vec<f64>,
    pub coincidence: Vec<f64>,
}

impl HomCurve {
    /// Mean of the outer 20 % of points on each side (at least one each).
    pub fn baseline(&self) -> f64 {
        outer_baseline(&self.coincidence)
    }

    pub fn min_index(&self) -> usize {
        let mut best = 0;
        for (j, p) in self.coincidence.iter().enumerate() {
            if *p < self.coincidence[best] {
                best = j;
            }
        }
        best
    }

    /// 1 − P_c(dip minimum) / baseline.
    pub fn visibility(&self) -> Result<f64> {
        let b = self.baseline();
        if !(b > 0.0) {
            return Err(Error::Baseline("non-positive baseline".into()));
        }
        Ok(1.0 - self.coincidence[self.min_index()] / b)
    }
}

pub(crate) fn outer_baseline(v: &[f64]) -> f64 {
    let k = ((v.len() as f64 * 0.2).floor() as usize).max(1).min(v.len());
    let left = v[..k].iter().sum::<f64>() / k as f64;
    let right = v[v.len() - k..].iter().sum::<f64>() / k as f64;
    0.5 * (left + right)
}

/// Exchange kernel G_jk = Ψ(ω_j, ω_k)·Ψ*(ω_k, ω_j)·Δω² on a symmetric grid.
fn exchange_kernel(jsa: &JointSpectralAmplitude) -> Result<Vec<Complex64>> {
    let grid = jsa.grid();
    if !grid.is_exchange_symmetric() {
        return Err(Error::GridMismatch(
            "HOM interference needs identical signal and idler axes".into(),
        ));
    }
    let n = grid.n_s();
    let a = jsa.amplitude();
    let w = grid.ds() * grid.di();
    let mut g = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            g.push(a[(j, k)] * a[(k, j)].conj() * w);
        }
    }
    Ok(g)
}

/// Largest |Δt| (s) the grid resolves; the sampled curve repeats with
/// period 2π/Δω.
pub fn max_unaliased_delay(grid: &crate::jsa::FrequencyGrid) -> f64 {
    std::f64::consts::PI / grid.ds()
}

/// Coincidence probability for one pair meeting on a balanced beam splitter,
/// P_c(Δt) = ½[1 − Re ∬ Ψ(ω₁,ω₂)Ψ*(ω₂,ω₁)e^{−i(ω₁−ω₂)Δt}].
pub fn hom_curve(jsa: &JointSpectralAmplitude, delays: &[f64]) -> Result<HomCurve> {
    if delays.is_empty() {
        return Err(Error::InvalidArgument("empty delay list".into()));
    }
    let g = exchange_kernel(jsa)?;
    let grid = jsa.grid();
    let limit = max_unaliased_delay(grid);
    if let Some(&bad) = delays.iter().find(|d| !(d.abs() <= limit)) {
        return Err(Error::Range {
            value: bad,
            min: -limit,
            max: limit,
        });
    }
    let n = grid.n_s();
    let axis: Vec<f64> = (0..n).map(|j| j as f64 * grid.ds()).collect();
    let coincidence = delays
        .par_iter()
        .map(|&dt| {
            let phase: Vec<Complex64> = axis.iter().map(|w| Complex64::from_polar(1.0, w * dt)).collect();
            let mut re = 0.0;
            for j in 0..n {
                let row = &g[j * n..(j + 1) * n];
                let mut inner = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    inner += row[k] * phase[k];
                }
                re += (phase[j].conj() * inner).re;
            }
            (0.5 * (1.0 - re)).clamp(0.0, 0.5 + 1e-12)
        })
        .collect();
    Ok(HomCurve {
        delays: delays.to_vec(),
        coincidence,
    })
}

/// Single-pair indistinguishability v(Δt) = 1 − 2·P_c(Δt).
pub fn indistinguishability(jsa: &JointSpectralAmplitude, delays: &[f64]) -> Result<Vec<f64>> {
    Ok(hom_curve(jsa, delays)?
        .coincidence
        .into_iter()
        .map(|p| (1.0 - 2.0 * p).clamp(0.0, 1.0))
        .collect())
}

/// Evenly spaced delays from −span to +span.
pub fn delay_scan(span: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0];
    }
    (0..points)
        .map(|j| -span + 2.0 * span * j as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsa::grid::FrequencyGrid;

    fn symmetric_jsa() -> JointSpectralAmplitude {
        let grid = FrequencyGrid::symmetric(48, -6.0, 6.0).unwrap();
        JointSpectralAmplitude::from_fn(grid, |s, i| {
            Complex64::new((-(s + i).powi(2) / 8.0 - (s - i).powi(2) / 2.0).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn symmetric_state_has_full_dip() {
        let jsa = symmetric_jsa();
        let c = hom_curve(&jsa, &delay_scan(8.0, 41)).unwrap();
        assert!(c.coincidence[20] < 1e-12);
        assert!((c.coincidence[0] - 0.5).abs() < 1e-6);
        assert!((c.visibility().unwrap() - 1.0).abs() < 1e-9);
        for j in 0..41 {
            assert!((c.coincidence[j] - c.coincidence[40 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_and_asymmetric() {
        let jsa = symmetric_jsa();
        assert!(hom_curve(&jsa, &[]).is_err());
        let grid = FrequencyGrid::new(8, 8, (0.0, 1.0), (0.5, 1.5)).unwrap();
        let jsa = JointSpectralAmplitude::from_fn(grid, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(hom_curve(&jsa, &[0.0]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn rejects_aliased_delays() {
        let jsa = symmetric_jsa();
        let limit = max_unaliased_delay(jsa.grid());
        assert!(hom_curve(&jsa, &[0.99 * limit]).is_ok());
        assert!(matches!(hom_curve(&jsa, &[1.01 * limit]), Err(Error::Range { .. })));
    }
}
