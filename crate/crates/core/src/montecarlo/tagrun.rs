use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{poisson, stage, stream_rng, RunConfig};
use crate::error::{Error, Result};
use crate::jsa::{FilterShape, SpectralFilter};
use crate::tags::{flags, StreamHeader, TagRecord, TagStream};
use crate::units::{omega_to_wavelength, NM};

const CHANNEL: u16 = 0;
const CHUNK: u64 = 8192;

/// Wavelength band (nm) that background photons are spread over.
fn background_band(filter: Option<&SpectralFilter>, fallback: (f64, f64)) -> (f64, f64) {
    match filter {
        Some(f) => match &f.shape {
            FilterShape::Tabulated(t) => {
                let pass: Vec<f64> = t.iter().filter(|p| p.1 > 0.0).map(|p| p.0).collect();
                match (pass.first(), pass.last()) {
                    (Some(a), Some(b)) if b > a => (a / NM, b / NM),
                    _ => fallback,
                }
            }
            _ => (
                (f.center_wavelength - f.bandwidth / 2.0) / NM,
                (f.center_wavelength + f.bandwidth / 2.0) / NM,
            ),
        },
        None => fallback,
    }
}

/// Single-detector time-of-flight run. Signal photons arrive at the clock
/// edge plus latency plus their relative fiber delay, idler photons an extra
/// `idler_delay_ps` later; every arrival gets Gaussian jitter. Background
/// photons are spread uniformly over the filter band, dark counts uniformly
/// over the clock period. A non-paralyzable deadtime is applied last.
pub fn simulate_tag_run(cfg: &RunConfig) -> Result<TagStream> {
    cfg.validate()?;
    let det = cfg.detector(0).clone();
    let sp = &cfg.spectrometer;
    let period = cfg.clock_period_ps();
    let header = StreamHeader::new(period, cfg.n_pulses, vec!["snspd".into()])?;

    let grid = cfg.source.jsa().grid();
    let (lo, hi) = grid.signal_bounds();
    let span = (omega_to_wavelength(hi) / NM, omega_to_wavelength(lo) / NM);
    let bands = match &cfg.filters {
        Some((s, i)) => (background_band(Some(s), span), background_band(Some(i), span)),
        None => (span, span),
    };
    for (model, band) in [(&sp.signal, bands.0), (&sp.idler, bands.1)] {
        for l in [band.0, band.1] {
            if !model.contains(l) {
                return Err(Error::Range {
                    value: l,
                    min: model.range_nm.0,
                    max: model.range_nm.1,
                });
            }
        }
    }
    let jitter = Normal::new(0.0, det.jitter_sigma_ps()).map_err(|e| Error::Numeric(e.to_string()))?;
    let dark_mean = det.dark_rate_hz * period * 1e-12;

    let n_chunks = cfg.n_pulses.div_ceil(CHUNK);
    let chunks: Vec<Vec<(u64, u16)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut events = Vec::new();
            let mut pairs = Vec::new();
            for k in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_pulses) {
                let mut rng = stream_rng(cfg.seed, stage::PAIRS, k);
                let edge = header.edge_ps(k) as f64 + sp.latency_ps;
                let push = |t: f64, flag: u16, events: &mut Vec<(u64, u16)>| {
                    events.push((t.max(0.0).round() as u64, flag));
                };
                pairs.clear();
                cfg.source.emit(&mut rng, &mut pairs);
                for p in &pairs {
                    let (ts, ti) = cfg.transmissions(p);
                    let ls = p.signal_wavelength() / NM;
                    let li = p.idler_wavelength() / NM;
                    if rng.random::<f64>() < ts && rng.random::<f64>() < det.efficiency {
                        let t = edge + sp.signal.delay_above_minimum(ls) + jitter.sample(&mut rng);
                        push(t, 0, &mut events);
                    }
                    if rng.random::<f64>() < ti && rng.random::<f64>() < det.efficiency {
                        let t = edge + sp.idler_delay_ps + sp.idler.delay_above_minimum(li) + jitter.sample(&mut rng);
                        push(t, flags::IDLER, &mut events);
                    }
                }
                for (path, band) in [(0u16, bands.0), (1, bands.1)] {
                    for _ in 0..poisson(&mut rng, cfg.background_rate_per_pulse) {
                        let l = band.0 + rng.random::<f64>() * (band.1 - band.0);
                        let t = if path == 0 {
                            edge + sp.signal.delay_above_minimum(l)
                        } else {
                            edge + sp.idler_delay_ps + sp.idler.delay_above_minimum(l)
                        };
                        let f = flags::BACKGROUND | if path == 1 { flags::IDLER } else { 0 };
                        push(t + jitter.sample(&mut rng), f, &mut events);
                    }
                }
                for _ in 0..poisson(&mut rng, dark_mean) {
                    let t = header.edge_ps(k) as f64 + rng.random::<f64>() * period;
                    push(t, flags::DARK, &mut events);
                }
            }
            events
        })
        .collect();

    let mut events: Vec<(u64, u16)> = chunks.into_iter().flatten().collect();
    events.sort_unstable();
    let dead = (det.deadtime_ns * 1e3).round() as u64;
    let mut records = Vec::with_capacity(events.len());
    let mut free_at = 0u64;
    for (t, flag) in events {
        if t < free_at {
            continue;
        }
        free_at = t + dead;
        let (clock_index, time_offset_ps) = header.split(t);
        records.push(TagRecord {
            channel: CHANNEL,
            flags: flag,
            clock_index,
            time_offset_ps,
        });
    }
    TagStream::new(header, records)
}
