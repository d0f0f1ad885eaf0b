use serde::{Deserialize, Serialize};

use super::record::TagStream;
use crate::error::{Error, Result};

/// A detection assigned to the pump pulse that produced it. `delay_ps` is
/// measured from that pulse's clock edge plus the fixed path latency (and
/// the idler delay line for idler tags), so it equals the fiber's relative
/// group delay up to jitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulseTag {
    pub clock_index: u64,
    pub delay_ps: f64,
    pub flags: u16,
}

/// Tags of one polarization, ordered by clock index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseTags {
    pub n_pulses: u64,
    pub clock_period_ps: f64,
    pub tags: Vec<PulseTag>,
}

impl PulseTags {
    pub fn empty(n_pulses: u64, clock_period_ps: f64) -> Self {
        Self {
            n_pulses,
            clock_period_ps,
            tags: Vec::new(),
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.n_pulses as f64 * self.clock_period_ps * 1e-12
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub(crate) fn check_sorted(&self) -> Result<()> {
        if self.tags.windows(2).any(|w| w[1].clock_index < w[0].clock_index) {
            return Err(Error::StreamAlignment("clock indices are not ordered".into()));
        }
        if let Some(t) = self.tags.last() {
            if t.clock_index >= self.n_pulses {
                return Err(Error::StreamAlignment(format!(
                    "clock index {} beyond run length {}",
                    t.clock_index, self.n_pulses
                )));
            }
        }
        Ok(())
    }
}

/// Time-multiplexing parameters of the single-detector spectrometer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemuxConfig {
    pub channel: u16,
    /// Fixed latency from clock edge to the arrival of the earliest signal
    /// wavelength (the fold point).
    pub latency_ps: f64,
    pub idler_delay_ps: f64,
    /// Acceptance window relative to latency: [start, start + width).
    pub window_start_ps: f64,
    pub window_width_ps: f64,
}

impl DemuxConfig {
    pub fn validate(&self, clock_period_ps: f64) -> Result<()> {
        if !(self.window_width_ps > 0.0) || !self.window_start_ps.is_finite() {
            return Err(Error::config("window", "width must be positive"));
        }
        if self.idler_delay_ps <= self.window_width_ps {
            return Err(Error::config("idler_delay", "delay must exceed the acceptance window"));
        }
        let shift = self.idler_delay_ps.rem_euclid(clock_period_ps);
        let w = self.window_width_ps;
        if w >= clock_period_ps || shift < w || clock_period_ps - shift < w {
            return Err(Error::config(
                "window",
                format!("signal and idler windows overlap modulo the {clock_period_ps} ps clock period"),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DemuxResult {
    pub signal: PulseTags,
    pub idler: PulseTags,
    /// Tags of the channel that fell in neither window.
    pub discarded: usize,
    /// Tags on other channels, ignored.
    pub other_channels: usize,
}

/// Splits a single-detector stream into signal (early window) and idler
/// (late window) tags, each indexed by the emitting pulse.
pub fn demux_polarization(stream: &TagStream, cfg: &DemuxConfig) -> Result<DemuxResult> {
    let period = stream.header.clock_period_ps;
    cfg.validate(period)?;
    let n = stream.header.n_pulses;
    let mut signal = PulseTags::empty(n, period);
    let mut idler = PulseTags::empty(n, period);
    let mut discarded = 0;
    let mut other = 0;
    let classify = |rel: f64| -> Option<(u64, f64)> {
        let shifted = rel - cfg.window_start_ps;
        let k = (shifted / period).floor();
        let off = shifted - k * period;
        if k < 0.0 || off >= cfg.window_width_ps || k as u64 >= n {
            return None;
        }
        Some((k as u64, off + cfg.window_start_ps))
    };
    for r in &stream.records {
        if r.channel != cfg.channel {
            other += 1;
            continue;
        }
        let rel = stream.absolute_time_ps(r) as f64 - cfg.latency_ps;
        if let Some((k, d)) = classify(rel) {
            signal.tags.push(PulseTag {
                clock_index: k,
                delay_ps: d,
                flags: r.flags,
            });
        } else if let Some((k, d)) = classify(rel - cfg.idler_delay_ps) {
            idler.tags.push(PulseTag {
                clock_index: k,
                delay_ps: d,
                flags: r.flags,
            });
        } else {
            discarded += 1;
        }
    }
    // Idler tags arrive a fixed delay later, so they are already ordered.
    Ok(DemuxResult {
        signal,
        idler,
        discarded,
        other_channels: other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::record::{StreamHeader, TagRecord};

    fn cfg() -> DemuxConfig {
        DemuxConfig {
            channel: 0,
            latency_ps: 1000.0,
            idler_delay_ps: 180_000.0,
            window_start_ps: -200.0,
            window_width_ps: 2000.0,
        }
    }

    #[test]
    fn one_early_one_late() {
        let h = StreamHeader::new(2_192_982.0, 10, vec!["snspd".into()]).unwrap();
        let recs = vec![
            TagRecord {
                channel: 0,
                flags: 0,
                clock_index: 4,
                time_offset_ps: 1500,
            },
            TagRecord {
                channel: 0,
                flags: 2,
                clock_index: 4,
                time_offset_ps: 181_600,
            },
        ];
        let s = TagStream::new(h, recs).unwrap();
        let d = demux_polarization(&s, &cfg()).unwrap();
        assert_eq!(d.signal.tags.len(), 1);
        assert_eq!(d.idler.tags.len(), 1);
        assert_eq!(d.signal.tags[0].clock_index, 4);
        assert_eq!(d.idler.tags[0].clock_index, 4);
        assert!((d.signal.tags[0].delay_ps - 500.0).abs() < 1.0);
        assert!((d.idler.tags[0].delay_ps - 600.0).abs() < 1.0);
    }

    #[test]
    fn empty_stream() {
        let h = StreamHeader::new(2_192_982.0, 10, vec![]).unwrap();
        let s = TagStream::new(h, vec![]).unwrap();
        let d = demux_polarization(&s, &cfg()).unwrap();
        assert!(d.signal.is_empty() && d.idler.is_empty());
    }

    #[test]
    fn overlapping_windows_rejected() {
        // 180 ns is 13.68 periods at 76 MHz; a 5 ns window wraps onto the idler.
        let mut c = cfg();
        c.window_width_ps = 5000.0;
        assert!(matches!(c.validate(13157.894736842105), Err(Error::Config { .. })));
        c.window_width_ps = 3000.0;
        assert!(c.validate(13157.894736842105).is_ok());
    }
}
