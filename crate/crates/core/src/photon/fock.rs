//! Number-basis transform of a balanced beam splitter.

use super::distribution::{JointPhotonNumberDistribution, PhotonNumberDistribution};
use crate::error::{Error, Result};

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// Output amplitudes of |n_a, n_b⟩ on a 50/50 beam splitter with
/// a† → (c† + d†)/√2 and b† → (c† − d†)/√2. Entry `p` is the amplitude of
/// |p, n_a + n_b − p⟩.
pub fn beamsplitter_amplitudes(n_a: usize, n_b: usize) -> Vec<f64> {
    let total = n_a + n_b;
    let f = factorials(total);
    let binom = |n: usize, k: usize| f[n] / (f[k] * f[n - k]);
    let norm = 2f64.powf(-(total as f64) / 2.0) / (f[n_a] * f[n_b]).sqrt();
    (0..=total)
        .map(|p| {
            // c^p comes from k of the a-factors and p−k of the b-factors.
            let lo = p.saturating_sub(n_b);
            let hi = p.min(n_a);
            let mut coeff = 0.0;
            for k in lo..=hi {
                let from_b_to_d = n_b - (p - k);
                let sign = if from_b_to_d.is_multiple_of(2) { 1.0 } else { -1.0 };
                coeff += sign * binom(n_a, k) * binom(n_b, p - k);
            }
            coeff * norm * (f[p] * f[total - p]).sqrt()
        })
        .collect()
}

/// Probability of finding `p` photons in port c for input |n_a, n_b⟩.
pub fn beamsplitter_probabilities(n_a: usize, n_b: usize) -> Vec<f64> {
    beamsplitter_amplitudes(n_a, n_b).into_iter().map(|a| a * a).collect()
}

/// Port distributions after interfering the two halves of a single-mode
/// TMSV on a 50/50 beam splitter.
///
/// Different pair numbers carry different total photon numbers, so they do
/// not interfere and the port marginal is an incoherent sum over n.
pub fn beamsplitter_mix(
    joint: &JointPhotonNumberDistribution,
) -> Result<(PhotonNumberDistribution, PhotonNumberDistribution)> {
    if !joint.is_diagonal(1e-12) {
        return Err(Error::Unsupported(
            "beam-splitter mixing needs perfectly correlated photon numbers".into(),
        ));
    }
    let nmax = joint.probs().nrows().min(joint.probs().ncols()) - 1;
    let diag: Vec<f64> = (0..=nmax).map(|n| joint.get(n, n)).collect();
    // A single thermal mode has a constant ratio p_{n+1}/p_n.
    let ratios: Vec<f64> = diag
        .windows(2)
        .filter(|w| w[0] > 1e-200 && w[1] > 1e-200)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios
        .windows(2)
        .any(|r| (r[1] - r[0]).abs() > 1e-9 * r[0].abs().max(1e-300))
    {
        return Err(Error::Unsupported(
            "multimode input: no closed-form beam-splitter output".into(),
        ));
    }
    let mut c = vec![0.0; 2 * nmax + 1];
    let mut d = vec![0.0; 2 * nmax + 1];
    for (n, pn) in diag.iter().enumerate() {
        if *pn == 0.0 {
            continue;
        }
        for (p, prob) in beamsplitter_probabilities(n, n).into_iter().enumerate() {
            c[p] += pn * prob;
            d[2 * n - p] += pn * prob;
        }
    }
    let truncated = joint.is_truncated();
    Ok((
        PhotonNumberDistribution::with_flag(c, truncated),
        PhotonNumberDistribution::with_flag(d, truncated),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_photons_bunch() {
        let p = beamsplitter_probabilities(1, 1);
        assert!(p[1].abs() < 1e-15);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_two_pattern() {
        let p = beamsplitter_probabilities(2, 2);
        let expect = [3.0 / 8.0, 0.0, 0.25, 0.0, 3.0 / 8.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn unitary_norm() {
        for a in 0..6 {
            for b in 0..6 {
                let s: f64 = beamsplitter_probabilities(a, b).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "{a} {b}");
            }
        }
    }
}
