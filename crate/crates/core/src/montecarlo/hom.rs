use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial, poisson, stage, stream_rng, RunConfig};
use crate::error::{Error, Result};
use crate::jsa::{apply_filter, hom_curve};
use crate::photon::beamsplitter_probabilities;
use crate::tags::{BackgroundRun, HomScanPoint, SinglesRates};

/// Largest number of indistinguishable pairs treated with the exact
/// number-basis beam-splitter transform.
const MAX_FOCK_PAIRS: usize = 4;

/// Counts recorded at one scan point (or in the pump-blocked run).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomCounts {
    pub delay_ps: f64,
    pub pulses: u64,
    /// Pulses with n ≥ 1 on both TES channels.
    pub coincidences: u64,
    /// Pulses with n ≥ 1 on channel c and on channel d.
    pub singles: [u64; 2],
}

/// Counts of the pump-blocked run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundCounts {
    pub pulses: u64,
    pub coincidences: u64,
    pub singles: [u64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomRun {
    pub points: Vec<HomCounts>,
    pub background: BackgroundCounts,
    pub period_s: f64,
    /// Emitted pair numbers summed over the scan.
    pub single_pair_pulses: u64,
    pub multi_pair_pulses: u64,
    /// Pulses with more indistinguishable pairs than the exact transform
    /// covers; the excess was treated as distinguishable.
    pub truncated_pulses: u64,
}

impl HomRun {
    pub fn scan(&self) -> Vec<HomScanPoint> {
        self.points
            .iter()
            .map(|p| HomScanPoint {
                delay_ps: p.delay_ps,
                coincidences: p.coincidences,
                pulses: p.pulses,
            })
            .collect()
    }

    pub fn background_run(&self) -> BackgroundRun {
        BackgroundRun {
            coincidences: self.background.coincidences,
            pulses: self.background.pulses,
        }
    }

    /// Photon singles rate = pump-on rate over the whole scan minus the
    /// pump-blocked rate, per detector.
    pub fn singles_rates(&self) -> SinglesRates {
        let on_pulses: u64 = self.points.iter().map(|p| p.pulses).sum();
        let t = self.period_s;
        let rate = |count: u64, pulses: u64| count as f64 / (pulses as f64 * t);
        let mut photon_hz = [0.0; 2];
        let mut background_hz = [0.0; 2];
        for c in 0..2 {
            let on: u64 = self.points.iter().map(|p| p.singles[c]).sum();
            background_hz[c] = rate(self.background.singles[c], self.background.pulses);
            photon_hz[c] = (rate(on, on_pulses) - background_hz[c]).max(0.0);
        }
        SinglesRates {
            photon_hz,
            background_hz,
            period_s: t,
        }
    }

    /// Ratio of multi-pair to single-pair emission events.
    pub fn multi_pair_ratio(&self) -> f64 {
        self.multi_pair_pulses as f64 / self.single_pair_pulses.max(1) as f64
    }
}

/// Cumulative output distribution on port c for |k⟩|k⟩ inputs.
fn fock_tables() -> Vec<Vec<f64>> {
    (0..=MAX_FOCK_PAIRS)
        .map(|k| {
            let mut acc = 0.0;
            beamsplitter_probabilities(k, k)
                .into_iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect()
}

struct PulseOutcome {
    counts: [u64; 2],
    pairs: usize,
    truncated: bool,
}

/// HOM scan with TES detection. Each photon passes its filter with the
/// transmission at its sampled wavelength. Of the m pairs with both photons
/// surviving, k ~ Binomial(m, v(Δt)) are treated as indistinguishable, where
/// v = 1 − 2·P_c(Δt) of the filtered single-pair state, and sent through the
/// exact |k⟩|k⟩ beam-splitter transform; every other photon leaves by either
/// port with probability ½. TES channels thin binomially and add Poisson
/// background counts. The pump-blocked run contains background alone.
pub fn simulate_hom_run(cfg: &RunConfig) -> Result<HomRun> {
    cfg.validate()?;
    let delays = cfg
        .hom_delays_ps
        .as_ref()
        .filter(|d| !d.is_empty())
        .ok_or_else(|| Error::config("hom_delays", "a non-empty delay list is required"))?;
    let filtered = match &cfg.filters {
        Some((s, i)) => apply_filter(cfg.source.jsa(), s, i)?.0,
        None => cfg.source.jsa().clone(),
    };
    let seconds: Vec<f64> = delays.iter().map(|d| d * 1e-12).collect();
    let curve = hom_curve(&filtered, &seconds)?;
    let tables = fock_tables();
    let eta = cfg.tes_efficiencies;
    let b = cfg.background_rate_per_pulse;

    let pulse = |rng: &mut rand_chacha::ChaCha8Rng, v: f64| -> PulseOutcome {
        let mut pairs = Vec::new();
        cfg.source.emit(rng, &mut pairs);
        let (mut both, mut lone) = (0u64, 0u64);
        for p in &pairs {
            let (ts, ti) = cfg.transmissions(p);
            let s = rng.random::<f64>() < ts;
            let i = rng.random::<f64>() < ti;
            match (s, i) {
                (true, true) => both += 1,
                (false, false) => {}
                _ => lone += 1,
            }
        }
        let k = binomial(rng, both, v) as usize;
        let fock = k.min(MAX_FOCK_PAIRS);
        let truncated = k > MAX_FOCK_PAIRS;
        let n_c_fock = super::sample_cdf(&tables[fock], rng.random::<f64>()) as u64;
        let distinguishable = 2 * (both - fock as u64) + lone;
        let to_c = binomial(rng, distinguishable, 0.5);
        let n_c = n_c_fock + to_c;
        let n_d = 2 * fock as u64 + distinguishable - n_c;
        let counts = [
            binomial(rng, n_c, eta[0]) + poisson(rng, b),
            binomial(rng, n_d, eta[1]) + poisson(rng, b),
        ];
        PulseOutcome {
            counts,
            pairs: pairs.len(),
            truncated,
        }
    };

    let n = cfg.n_pulses;
    let mut points = Vec::with_capacity(delays.len());
    let (mut single, mut multi, mut truncated) = (0, 0, 0);
    for (j, (&delay_ps, &pc)) in delays.iter().zip(&curve.coincidence).enumerate() {
        let v = (1.0 - 2.0 * pc).clamp(0.0, 1.0);
        let tally = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(cfg.seed, stage::HOM, ((j as u64) << 40) | k);
                let o = pulse(&mut rng, v);
                [
                    (o.counts[0] > 0 && o.counts[1] > 0) as u64,
                    (o.counts[0] > 0) as u64,
                    (o.counts[1] > 0) as u64,
                    (o.pairs == 1) as u64,
                    (o.pairs > 1) as u64,
                    o.truncated as u64,
                ]
            })
            .reduce(|| [0; 6], |a, b| std::array::from_fn(|i| a[i] + b[i]));
        points.push(HomCounts {
            delay_ps,
            pulses: n,
            coincidences: tally[0],
            singles: [tally[1], tally[2]],
        });
        single += tally[3];
        multi += tally[4];
        truncated += tally[5];
    }

    let bg = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, stage::HOM_BACKGROUND, k);
            let c = [poisson(&mut rng, b), poisson(&mut rng, b)];
            [(c[0] > 0 && c[1] > 0) as u64, (c[0] > 0) as u64, (c[1] > 0) as u64]
        })
        .reduce(|| [0; 3], |a, b| std::array::from_fn(|i| a[i] + b[i]));

    Ok(HomRun {
        points,
        background: BackgroundCounts {
            pulses: n,
            coincidences: bg[0],
            singles: [bg[1], bg[2]],
        },
        period_s: cfg.clock_period_ps() * 1e-12,
        single_pair_pulses: single,
        multi_pair_pulses: multi,
        truncated_pulses: truncated,
    })
}
