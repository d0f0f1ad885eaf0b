use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial, poisson, sample_cdf, stage, stream_rng, tes, RunConfig};
use crate::error::{Error, Result};
use crate::tags::{flags, g2_peak_ratio, G2Estimate, StreamHeader, TagRecord, TagStream};

/// Which correlation the two click detectors see.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    /// Signal on detector 0, idler on detector 1 (g²_HV).
    Cross,
    /// Signal split on a balanced beam splitter (g²_HH).
    Auto,
    /// One beam-splitter output port of the interfered beams, split again
    /// (g²_cc).
    Smsv,
}

/// Start-stop stream from two free-running click detectors. A detector
/// clicks at most once per pulse if any of its photons is detected; jitter,
/// dark counts and deadtime follow the detector models.
pub fn simulate_correlation_run(cfg: &RunConfig, kind: CorrelationKind) -> Result<TagStream> {
    cfg.validate()?;
    let period = cfg.clock_period_ps();
    let header = StreamHeader::new(period, cfg.n_pulses, vec!["det0".into(), "det1".into()])?;
    let dets = [cfg.detector(0).clone(), cfg.detector(1).clone()];
    let jitter = dets
        .iter()
        .map(|d| Normal::new(0.0, d.jitter_sigma_ps()).map_err(|e| Error::Numeric(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let port = match kind {
        CorrelationKind::Smsv => Some(tes::smsv_port_cdf(&cfg.source.squeezer().mode_means()?)?),
        _ => None,
    };
    let latency = cfg.spectrometer.latency_ps;

    let events: Vec<Vec<(u64, u16, u16)>> = (0..cfg.n_pulses)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, stage::CORRELATION, k);
            let photons = match kind {
                CorrelationKind::Cross => {
                    let n = cfg.source.draw_count(&mut rng) as u64;
                    [n, n]
                }
                CorrelationKind::Auto => {
                    let n = cfg.source.draw_count(&mut rng) as u64;
                    let a = binomial(&mut rng, n, 0.5);
                    [a, n - a]
                }
                CorrelationKind::Smsv => {
                    let n = sample_cdf(port.as_ref().expect("port table"), rng.random::<f64>()) as u64;
                    let a = binomial(&mut rng, n, 0.5);
                    [a, n - a]
                }
            };
            let edge = header.edge_ps(k) as f64;
            let mut out = Vec::new();
            for ch in 0..2 {
                let d = &dets[ch];
                let hits =
                    binomial(&mut rng, photons[ch], d.efficiency) + poisson(&mut rng, cfg.background_rate_per_pulse);
                if hits > 0 {
                    let t = edge + latency + jitter[ch].sample(&mut rng);
                    out.push((t.max(0.0).round() as u64, ch as u16, 0));
                }
                for _ in 0..poisson(&mut rng, d.dark_rate_hz * period * 1e-12) {
                    let t = edge + rng.random::<f64>() * period;
                    out.push((t.round() as u64, ch as u16, flags::DARK));
                }
            }
            out
        })
        .collect();

    let mut all: Vec<(u64, u16, u16)> = events.into_iter().flatten().collect();
    all.sort_unstable();
    let dead = [dets[0].deadtime_ns, dets[1].deadtime_ns].map(|d| (d * 1e3).round() as u64);
    let mut free_at = [0u64; 2];
    let mut records = Vec::with_capacity(all.len());
    for (t, ch, flag) in all {
        let c = ch as usize;
        if t < free_at[c] {
            continue;
        }
        free_at[c] = t + dead[c];
        let (clock_index, time_offset_ps) = header.split(t);
        records.push(TagRecord {
            channel: ch,
            flags: flag,
            clock_index,
            time_offset_ps,
        });
    }
    TagStream::new(header, records)
}

/// Peak-ratio g² between channels 0 (start) and 1 (stop) of a correlation
/// stream, integrating `n_side` side peaks on each side.
pub fn correlation_g2(stream: &TagStream, n_side: usize) -> Result<G2Estimate> {
    let start = stream.channel_times(0);
    let stop = stream.channel_times(1);
    g2_peak_ratio(&start, &stop, stream.header.clock_period_ps, n_side, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsa::{Complex64, FrequencyGrid, JointSpectralAmplitude};
    use crate::montecarlo::{FrequencySampling, PairSource, PairStatistics, CAVITY_DUMPED_RATE_HZ};

    fn single_mode(mean: f64) -> PairSource {
        let grid = FrequencyGrid::symmetric(16, -3.0, 3.0).unwrap();
        let jsa = JointSpectralAmplitude::from_fn(grid, |s, i| Complex64::new((-(s * s + i * i)).exp(), 0.0)).unwrap();
        PairSource::new(jsa, mean, FrequencySampling::Coherent, PairStatistics::Thermal).unwrap()
    }

    #[test]
    fn cross_correlation_bunches() {
        let mut cfg = RunConfig::new(single_mode(0.5), CAVITY_DUMPED_RATE_HZ, 100_000, 2);
        cfg.detectors[0].efficiency = 0.1;
        let s = simulate_correlation_run(&cfg, CorrelationKind::Cross).unwrap();
        let g = correlation_g2(&s, 5).unwrap();
        // 2 + 1/μ = 4 in the low-efficiency limit.
        assert!((g.g2 - 4.0).abs() < 5.0 * g.sigma + 0.2, "{g:?}");
    }

    #[test]
    fn replay_is_identical() {
        let cfg = RunConfig::new(single_mode(0.2), CAVITY_DUMPED_RATE_HZ, 5_000, 11);
        let a = simulate_correlation_run(&cfg, CorrelationKind::Smsv).unwrap();
        let b = simulate_correlation_run(&cfg, CorrelationKind::Smsv).unwrap();
        assert_eq!(a, b);
    }
}
