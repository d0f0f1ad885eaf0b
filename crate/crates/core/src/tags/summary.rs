use serde::Serialize;

use super::demux::PulseTags;
use crate::error::{Error, Result};
use crate::stats::Estimate;

/// Event rates in Hz with Poisson uncertainties.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountSummary {
    pub duration_s: f64,
    pub singles_hz: Vec<Estimate>,
    pub coincidence_hz: Estimate,
    pub background_coincidence_hz: Option<Estimate>,
    /// Uncorrelated coincidence rate r₁·r₂·T expected from the singles.
    pub accidental_hz: Estimate,
}

fn rate(n: u64, t: f64) -> Estimate {
    Estimate::new(n as f64 / t, (n as f64).sqrt() / t)
}

/// Number of pulses holding at least one tag in each stream.
pub fn coincident_pulses(a: &PulseTags, b: &PulseTags) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0u64);
    let (x, y) = (&a.tags, &b.tags);
    while i < x.len() && j < y.len() {
        let (ki, kj) = (x[i].clock_index, y[j].clock_index);
        if ki < kj {
            i += 1;
        } else if kj < ki {
            j += 1;
        } else {
            n += 1;
            while i < x.len() && x[i].clock_index == ki {
                i += 1;
            }
            while j < y.len() && y[j].clock_index == kj {
                j += 1;
            }
        }
    }
    n
}

/// Singles, coincidence and accidental rates of a signal/idler pair of
/// streams, plus the coincidence rate of an optional pump-blocked run.
pub fn count_summary(
    signal: &PulseTags,
    idler: &PulseTags,
    background: Option<(&PulseTags, &PulseTags)>,
) -> Result<CountSummary> {
    let t = signal.duration_s();
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("run duration is zero".into()));
    }
    let s = rate(signal.len() as u64, t);
    let i = rate(idler.len() as u64, t);
    let c = rate(coincident_pulses(signal, idler), t);
    let period = signal.clock_period_ps * 1e-12;
    let acc = s.value * i.value * period;
    let acc_sigma = period * (i.value * s.sigma).hypot(s.value * i.sigma);
    let background_coincidence_hz = match background {
        Some((bs, bi)) => {
            let tb = bs.duration_s();
            if !(tb > 0.0) {
                return Err(Error::InvalidArgument("background run duration is zero".into()));
            }
            Some(rate(coincident_pulses(bs, bi), tb))
        }
        None => None,
    };
    Ok(CountSummary {
        duration_s: t,
        singles_hz: vec![s, i],
        coincidence_hz: c,
        background_coincidence_hz,
        accidental_hz: Estimate::new(acc, acc_sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::PulseTag;

    fn tags(n: u64, ks: &[u64]) -> PulseTags {
        PulseTags {
            n_pulses: n,
            clock_period_ps: 1e6,
            tags: ks
                .iter()
                .map(|&k| PulseTag {
                    clock_index: k,
                    delay_ps: 0.0,
                    flags: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn rates() {
        let s = tags(1000, &[1, 2, 2, 5]);
        let i = tags(1000, &[2, 5, 7]);
        let c = count_summary(&s, &i, None).unwrap();
        assert!((c.duration_s - 1e-3).abs() < 1e-15);
        assert!((c.singles_hz[0].value - 4000.0).abs() < 1e-9);
        assert!((c.coincidence_hz.value - 2000.0).abs() < 1e-9);
        assert!(count_summary(&tags(0, &[]), &tags(0, &[]), None).is_err());
    }
}
