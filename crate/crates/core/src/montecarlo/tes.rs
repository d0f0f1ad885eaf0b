use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial, poisson, sample_cdf, stage, stream_rng, RunConfig};
use crate::error::{Error, Result};
use crate::photon::{nmax_for_tail, smsv_pn};
use crate::stats::{propagate_poisson, Estimate};

/// Photon numbers recorded by the two TES channels for one pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TesRecord {
    pub clock_index: u64,
    pub n_c: u32,
    pub n_d: u32,
}

/// What reaches the two TES channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TesInput {
    /// Channel c sees the signal beam, channel d the idler beam.
    TwoMode,
    /// Signal and idler interfered on a balanced beam splitter with matched
    /// modes: each output port carries independent single-mode squeezed
    /// vacuum per Schmidt mode.
    Smsv,
}

/// Cumulative photon-number distribution of one beam-splitter output port,
/// the convolution of single-mode squeezed vacua over Schmidt modes.
pub(super) fn smsv_port_cdf(mode_means: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = mode_means.iter().sum();
    let nmax = 2 * nmax_for_tail(total, 1e-12).max(4);
    let mut acc = vec![0.0; nmax + 1];
    acc[0] = 1.0;
    for &mu in mode_means.iter().filter(|m| **m > 0.0) {
        let p = smsv_pn(mu, nmax)?;
        let mut next = vec![0.0; nmax + 1];
        for (a, pa) in acc.iter().enumerate().filter(|x| *x.1 > 0.0) {
            for (b, pb) in p.probs().iter().enumerate().take(nmax + 1 - a) {
                next[a + b] += pa * pb;
            }
        }
        acc = next;
    }
    let mut c = 0.0;
    Ok(acc
        .into_iter()
        .map(|p| {
            c += p;
            c
        })
        .collect())
}

/// Per-pulse TES photon numbers. True photon numbers are thinned binomially
/// with the two TES efficiencies and Poisson background counts are added.
/// The TES is modeled as a jitter-free per-pulse counter; spectral filters
/// are not applied.
pub fn simulate_tes_run(cfg: &RunConfig, input: TesInput) -> Result<Vec<TesRecord>> {
    cfg.validate()?;
    let eta = cfg.tes_efficiencies;
    let b = cfg.background_rate_per_pulse;
    let port = match input {
        TesInput::Smsv => Some(smsv_port_cdf(&cfg.source.squeezer().mode_means()?)?),
        TesInput::TwoMode => None,
    };
    let records = (0..cfg.n_pulses)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, stage::TES, k);
            let (c, d) = match &port {
                None => {
                    let n = cfg.source.draw_count(&mut rng) as u64;
                    (n, n)
                }
                Some(cdf) => (
                    sample_cdf(cdf, rng.random::<f64>()) as u64,
                    sample_cdf(cdf, rng.random::<f64>()) as u64,
                ),
            };
            let n_c = binomial(&mut rng, c, eta[0]) + poisson(&mut rng, b);
            let n_d = binomial(&mut rng, d, eta[1]) + poisson(&mut rng, b);
            TesRecord {
                clock_index: k,
                n_c: n_c as u32,
                n_d: n_d as u32,
            }
        })
        .collect();
    Ok(records)
}

/// Number of pulses with n photons on channel 0 (c) or 1 (d).
pub fn photon_number_histogram(records: &[TesRecord], channel: usize) -> Vec<u64> {
    let mut h = vec![0u64; 1];
    for r in records {
        let n = if channel == 0 { r.n_c } else { r.n_d } as usize;
        if n >= h.len() {
            h.resize(n + 1, 0);
        }
        h[n] += 1;
    }
    h
}

/// g² = Σ n(n−1)p_n / (Σ n p_n)² from a photon-number histogram, with σ
/// from Poisson propagation of every histogram bin.
pub fn g2_from_tes(histogram: &[u64]) -> Result<Estimate> {
    let counts: Vec<f64> = histogram.iter().map(|c| *c as f64).collect();
    let first: f64 = counts.iter().enumerate().map(|(n, c)| n as f64 * c).sum();
    if first == 0.0 {
        return Err(Error::InsufficientStatistics("no photons recorded".into()));
    }
    propagate_poisson(&counts, |c| {
        let total: f64 = c.iter().sum();
        let m1: f64 = c.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        let m2: f64 = c
            .iter()
            .enumerate()
            .map(|(n, x)| (n * n.saturating_sub(1)) as f64 * x)
            .sum();
        total * m2 / (m1 * m1)
    })
}

pub fn write_tes_csv(records: &[TesRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    for r in records {
        w.serialize(r).map_err(|e| Error::format(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_tes_csv(path: &Path) -> Result<Vec<TesRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::format(path, e.to_string())))
        .collect()
}
