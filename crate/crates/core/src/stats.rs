//! Counting-statistics uncertainties and the parametric bootstrap for K_ABS.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tags::Histogram2D;

pub const DEFAULT_RESAMPLES: usize = 1000;

/// Value with a 1σ uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    /// |a − b| in units of the combined σ.
    pub fn z_distance(&self, other: &Self) -> f64 {
        let s = self.sigma.hypot(other.sigma);
        if s == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / s
        }
    }
}

/// First-order propagation of independent Poisson counts (var N = N)
/// through `f`, using central differences.
pub fn propagate_poisson<F>(counts: &[f64], f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidArgument("counts must be finite and non-negative".into()));
    }
    let value = f(counts);
    if !value.is_finite() {
        return Err(Error::Numeric("expression is not finite at the observed counts".into()));
    }
    let mut var = 0.0;
    let mut x = counts.to_vec();
    for k in 0..counts.len() {
        if counts[k] == 0.0 {
            continue;
        }
        let h = 1e-6 * counts[k].max(1.0);
        x[k] = counts[k] + h;
        let up = f(&x);
        x[k] = counts[k] - h;
        let down = f(&x);
        x[k] = counts[k];
        let d = (up - down) / (2.0 * h);
        if !d.is_finite() {
            return Err(Error::Numeric("non-finite derivative".into()));
        }
        var += d * d * counts[k];
    }
    Ok(Estimate::new(value, var.sqrt()))
}

/// N₁/N₂ with σ² = (N₁/N₂)²(1/N₁ + 1/N₂).
pub fn ratio(n1: f64, n2: f64) -> Result<Estimate> {
    if !(n2 > 0.0) {
        return Err(Error::Numeric("zero denominator count".into()));
    }
    let r = n1 / n2;
    let rel = if n1 > 0.0 { 1.0 / n1 + 1.0 / n2 } else { 0.0 };
    Ok(Estimate::new(r, r * rel.sqrt()))
}

/// 1 − a/b for independent Poisson a, b.
pub fn visibility(a: f64, b: f64) -> Result<Estimate> {
    let r = ratio(a, b)?;
    Ok(Estimate::new(1.0 - r.value, r.sigma))
}

/// Parametric bootstrap summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub estimate: f64,
    pub resamples: usize,
    pub sigma: f64,
    pub median: f64,
    /// Percentile interval (2.5 %, 97.5 %) of the resampled statistic.
    pub percentile: (f64, f64),
    /// Bias-corrected "basic" interval (2θ̂ − q₉₇.₅, 2θ̂ − q₂.₅).
    pub basic: (f64, f64),
}

impl BootstrapResult {
    pub fn bias(&self) -> f64 {
        self.median - self.estimate
    }

    pub fn basic_half_width(&self) -> f64 {
        0.5 * (self.basic.1 - self.basic.0)
    }

    pub fn basic_contains(&self, x: f64) -> bool {
        x >= self.basic.0 && x <= self.basic.1
    }

    pub fn percentile_contains(&self, x: f64) -> bool {
        x >= self.percentile.0 && x <= self.percentile.1
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Summarizes resampled statistics around a point estimate.
pub fn summarize(estimate: f64, mut samples: Vec<f64>) -> Result<BootstrapResult> {
    if samples.len() < 2 || samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("bootstrap produced no usable resamples".into()));
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let (lo, hi) = (quantile(&samples, 0.025), quantile(&samples, 0.975));
    Ok(BootstrapResult {
        estimate,
        resamples: samples.len(),
        sigma: var.sqrt(),
        median: quantile(&samples, 0.5),
        percentile: (lo, hi),
        basic: (2.0 * estimate - hi, 2.0 * estimate - lo),
    })
}

/// Resamples every bin from Poisson(observed) and recomputes K_ABS of √counts.
///
/// Resample `r` draws from its own ChaCha stream keyed by (`seed`, r), so the
/// result does not depend on the thread count.
pub fn bootstrap_kabs(hist: &Histogram2D, n_resamples: usize, seed: u64) -> Result<BootstrapResult> {
    if n_resamples < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 resamples, got {n_resamples}"
        )));
    }
    if hist.total() == 0 {
        return Err(Error::InvalidArgument("empty histogram".into()));
    }
    let estimate = hist.k_abs()?;
    let counts: Vec<f64> = hist.counts.iter().map(|c| *c as f64).collect();
    let (rows, cols) = hist.counts.shape();
    let samples: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let m = nalgebra::DMatrix::from_iterator(
                rows,
                cols,
                counts.iter().map(|&c| {
                    if c > 0.0 {
                        let draw: f64 = Poisson::new(c).expect("positive mean").sample(&mut rng);
                        draw.sqrt()
                    } else {
                        0.0
                    }
                }),
            );
            crate::jsa::effective_mode_number_of_matrix(&m).unwrap_or(f64::NAN)
        })
        .collect();
    let usable: Vec<f64> = samples.into_iter().filter(|s| s.is_finite()).collect();
    summarize(estimate, usable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::Bins;
    use nalgebra::DMatrix;

    #[test]
    fn ratio_closed_form() {
        let r = ratio(100.0, 400.0).unwrap();
        let expect = 0.25 * (1.0f64 / 100.0 + 1.0 / 400.0).sqrt();
        assert!((r.sigma - expect).abs() < 1e-15);
        assert!(ratio(1.0, 0.0).is_err());
        let g = propagate_poisson(&[100.0, 400.0], |c| c[0] / c[1]).unwrap();
        assert!((g.sigma - expect).abs() < 1e-9);
        let v = visibility(30.0, 600.0).unwrap();
        let pv = propagate_poisson(&[30.0, 600.0], |c| 1.0 - c[0] / c[1]).unwrap();
        assert!((v.sigma - pv.sigma).abs() < 1e-9);
        assert!(propagate_poisson(&[1.0, 0.0], |c| c[0] / c[1]).is_err());
    }

    #[test]
    fn bootstrap_rank_one() {
        let b = Bins::uniform(0.0, 8.0, 8).unwrap();
        let u: [f64; 8] = [1.0, 3.0, 7.0, 10.0, 7.0, 3.0, 1.0, 0.5];
        let m = DMatrix::from_fn(8, 8, |i, j| (u[i] * u[j] * 2000.0).round() as u64);
        let h = Histogram2D::from_counts(b.clone(), b, m).unwrap();
        let r = bootstrap_kabs(&h, 200, 7).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-4);
        assert!(r.sigma < 1e-3);
        assert!(r.percentile.0 <= r.median && r.median <= r.percentile.1);
        assert_eq!(r, bootstrap_kabs(&h, 200, 7).unwrap());
        assert!(bootstrap_kabs(&h, 50, 7).is_err());
    }
}
