use serde::{Deserialize, Serialize};

use super::distribution::{JointPhotonNumberDistribution, PhotonNumberDistribution, TAIL_TOLERANCE};
use crate::error::{Error, Result};
use crate::jsa::effective_mode_number;

/// Mean photon number per beam per pulse and optional Schmidt weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezerSpec {
    pub mean_total_photons: f64,
    pub schmidt_weights: Vec<f64>,
}

impl SqueezerSpec {
    pub fn single_mode(mean: f64) -> Self {
        Self {
            mean_total_photons: mean,
            schmidt_weights: vec![1.0],
        }
    }

    pub fn multimode(mean: f64, weights: Vec<f64>) -> Self {
        Self {
            mean_total_photons: mean,
            schmidt_weights: weights,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_total_photons.is_finite() && self.mean_total_photons >= 0.0) {
            return Err(Error::config(
                "mean_photons",
                format!("must be non-negative, got {}", self.mean_total_photons),
            ));
        }
        if self.schmidt_weights.is_empty() {
            return Err(Error::config("schmidt_weights", "at least one weight required"));
        }
        effective_mode_number(&self.schmidt_weights).map_err(|e| Error::config("schmidt_weights", e.to_string()))?;
        let total: f64 = self.schmidt_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config("schmidt_weights", format!("must sum to 1, got {total}")));
        }
        if self.schmidt_weights.windows(2).any(|w| w[1] > w[0] + 1e-15) {
            return Err(Error::config("schmidt_weights", "must be in descending order"));
        }
        Ok(())
    }

    pub fn is_single_mode(&self) -> bool {
        self.schmidt_weights.len() == 1 || self.schmidt_weights[1..].iter().all(|w| *w == 0.0)
    }

    /// Per-mode mean photon numbers μ_n = sinh²(c√λ_n) with Σ μ_n = ⟨n⟩.
    pub fn mode_means(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let target = self.mean_total_photons;
        let w = &self.schmidt_weights;
        if target == 0.0 {
            return Ok(vec![0.0; w.len()]);
        }
        let total = |c: f64| w.iter().map(|l| (c * l.sqrt()).sinh().powi(2)).sum::<f64>();
        // Single-mode bound: the largest weight alone must supply ⟨n⟩ at most.
        let mut hi = (target.sqrt().asinh() / w[0].sqrt()).max(1e-12);
        while total(hi) < target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = 0.5 * (lo + hi);
        Ok(w.iter().map(|l| (c * l.sqrt()).sinh().powi(2)).collect())
    }
}

/// Smallest nmax whose thermal tail at mean `mu` is below `tol`.
pub fn nmax_for_tail(mu: f64, tol: f64) -> usize {
    if mu <= 0.0 {
        return 1;
    }
    let q = mu / (1.0 + mu);
    ((tol.ln() / q.ln()).ceil() as usize).max(1)
}

fn geometric(mu: f64, nmax: usize) -> Vec<f64> {
    let q = mu / (1.0 + mu);
    let mut out = Vec::with_capacity(nmax + 1);
    let mut p = 1.0 / (1.0 + mu);
    for _ in 0..=nmax {
        out.push(p);
        p *= q;
    }
    out
}

/// Two-mode squeezed vacuum ladder p_{n,n} = μⁿ/(1+μ)^{n+1}.
pub fn tmsv_joint_pn(spec: &SqueezerSpec, nmax: usize) -> Result<JointPhotonNumberDistribution> {
    spec.validate()?;
    if !spec.is_single_mode() {
        return Err(Error::InvalidArgument(
            "tmsv_joint_pn needs a single Schmidt mode; use multimode_joint_pn".into(),
        ));
    }
    let mu = spec.mean_total_photons;
    let diag = geometric(mu, nmax);
    let tail = if mu == 0.0 {
        0.0
    } else {
        (mu / (1.0 + mu)).powi(nmax as i32 + 1)
    };
    Ok(JointPhotonNumberDistribution::diagonal(&diag, tail > TAIL_TOLERANCE))
}

/// Independent TMSV per Schmidt mode, convolved into total counts. Every
/// mode contributes equal signal and idler numbers, so the result stays
/// diagonal.
pub fn multimode_joint_pn(spec: &SqueezerSpec, nmax: usize) -> Result<JointPhotonNumberDistribution> {
    let means = spec.mode_means()?;
    let mut acc = vec![0.0; nmax + 1];
    acc[0] = 1.0;
    for mu in means.into_iter().filter(|m| *m > 0.0) {
        let g = geometric(mu, nmax);
        let mut next = vec![0.0; nmax + 1];
        for (a, pa) in acc.iter().enumerate() {
            if *pa == 0.0 {
                continue;
            }
            for (b, pb) in g.iter().enumerate().take(nmax + 1 - a) {
                next[a + b] += pa * pb;
            }
        }
        acc = next;
    }
    let tail = 1.0 - acc.iter().sum::<f64>();
    Ok(JointPhotonNumberDistribution::diagonal(&acc, tail > TAIL_TOLERANCE))
}

/// Squeeze parameter r with sinh²r = ⟨n⟩.
pub fn squeeze_parameter(mean_photons: f64) -> f64 {
    mean_photons.sqrt().asinh()
}

/// Single-mode squeezed vacuum:
/// p_{2m} = (2m)!/(2^{2m}(m!)²)·tanh^{2m}r / cosh r, odd terms zero.
pub fn smsv_pn(mean_photons: f64, nmax: usize) -> Result<PhotonNumberDistribution> {
    if !(mean_photons.is_finite() && mean_photons > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean photon number must be positive, got {mean_photons}"
        )));
    }
    let r = squeeze_parameter(mean_photons);
    let t2 = r.tanh().powi(2);
    let mut probs = vec![0.0; nmax + 1];
    let mut term = 1.0 / r.cosh();
    let mut m = 0;
    while 2 * m <= nmax {
        probs[2 * m] = term;
        m += 1;
        term *= t2 * (2 * m - 1) as f64 / (2 * m) as f64;
    }
    PhotonNumberDistribution::new(probs)
}

/// Squeezing in dB for a given mean photon number, −10·log₁₀(e^{−2r}).
pub fn mean_photons_to_squeezing_db(mean_photons: f64) -> Result<f64> {
    if !(mean_photons.is_finite() && mean_photons >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean photon number must be ≥ 0, got {mean_photons}"
        )));
    }
    Ok(20.0 * squeeze_parameter(mean_photons) * std::f64::consts::LOG10_E)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryPoint {
    pub mean_photons: f64,
    pub g2_hv: f64,
    pub g2_hh: f64,
    pub g2_cc: f64,
}

/// Single-mode predictions: cross 2 + 1/⟨n⟩, marginal 2, after the beam
/// splitter 3 + 1/⟨n⟩.
pub fn theory_curves(means: &[f64]) -> Result<Vec<TheoryPoint>> {
    means
        .iter()
        .map(|&n| {
            if !(n > 0.0) {
                return Err(Error::InvalidArgument(format!("⟨n⟩ must be positive, got {n}")));
            }
            Ok(TheoryPoint {
                mean_photons: n,
                g2_hv: 2.0 + 1.0 / n,
                g2_hh: 2.0,
                g2_cc: 3.0 + 1.0 / n,
            })
        })
        .collect()
}

/// Geometric grid of `points` values between `lo` and `hi` inclusive.
pub fn log_range(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = points - 1;
    (0..points)
        .map(|j| match j {
            0 => lo,
            j if j == last => hi,
            j => (a + (b - a) * j as f64 / last as f64).exp(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::{g2_cross, g2_from_pn};

    #[test]
    fn tmsv_examples() {
        let j = tmsv_joint_pn(&SqueezerSpec::single_mode(0.0), 8).unwrap();
        assert_eq!(j.get(0, 0), 1.0);
        let j = tmsv_joint_pn(&SqueezerSpec::single_mode(1.0), 8).unwrap();
        for n in 0..8 {
            assert!((j.get(n, n) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        let j = tmsv_joint_pn(&SqueezerSpec::single_mode(0.11), 32).unwrap();
        assert!((j.get(1, 1) - 0.11 / (1.11 * 1.11)).abs() < 1e-15);
        let spec = SqueezerSpec::single_mode(0.1);
        let j = tmsv_joint_pn(&spec, nmax_for_tail(0.1, 1e-14)).unwrap();
        assert!((g2_cross(&j).unwrap() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn mode_means_sum_to_target() {
        let spec = SqueezerSpec::multimode(0.4, vec![0.6, 0.3, 0.1]);
        let mu = spec.mode_means().unwrap();
        assert!((mu.iter().sum::<f64>() - 0.4).abs() < 1e-12);
        assert!(mu[0] > mu[1] && mu[1] > mu[2]);
        let single = SqueezerSpec::single_mode(0.4).mode_means().unwrap();
        assert!((single[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn smsv_properties() {
        let p = smsv_pn(0.2, 120).unwrap();
        assert!(p.probs().iter().skip(1).step_by(2).all(|v| *v == 0.0));
        assert!((g2_from_pn(&p).unwrap() - 8.0).abs() < 1e-9);
        assert!((p.mean() - 0.2).abs() < 1e-12);
        assert!(smsv_pn(1e-8, 4).unwrap().probs()[0] > 1.0 - 1e-8);
    }

    #[test]
    fn squeezing_db() {
        assert_eq!(mean_photons_to_squeezing_db(0.0).unwrap(), 0.0);
        let s = 1f64.sinh().powi(2);
        assert!((mean_photons_to_squeezing_db(s).unwrap() - 8.685889638065037).abs() < 1e-12);
        assert!((mean_photons_to_squeezing_db(0.11).unwrap() - 2.8).abs() < 0.05);
    }

    #[test]
    fn theory_values() {
        let t = theory_curves(&[1.0]).unwrap()[0];
        assert_eq!((t.g2_hv, t.g2_hh, t.g2_cc), (3.0, 2.0, 4.0));
        assert!(theory_curves(&[0.0]).is_err());
    }
}
