use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Estimate;

/// Coincidences recorded at one beam-splitter delay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomScanPoint {
    pub delay_ps: f64,
    pub coincidences: u64,
    pub pulses: u64,
}

/// Pump-blocked run: coincidences from stray light alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundRun {
    pub coincidences: u64,
    pub pulses: u64,
}

/// Per-detector single-count rates (Hz) split into down-converted photons
/// and background, with the pulse period that defines the coincidence window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinglesRates {
    pub photon_hz: [f64; 2],
    pub background_hz: [f64; 2],
    pub period_s: f64,
}

impl SinglesRates {
    /// r_ph,1·r_bg,2·T + r_bg,1·r_ph,2·T, converted to a probability per pulse.
    pub fn accidentals_per_pulse(&self) -> f64 {
        let t = self.period_s;
        (self.photon_hz[0] * self.background_hz[1] * t + self.background_hz[0] * self.photon_hz[1] * t) * t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomAnalysis {
    pub raw: Estimate,
    pub background_subtracted: Estimate,
    pub accidental_corrected: Estimate,
    pub dip_delay_ps: f64,
    /// Corrected coincidence probability per pulse at each scan point.
    pub corrected_rates: Vec<f64>,
}

struct Level {
    rates: Vec<f64>,
    vars: Vec<f64>,
}

fn visibility_of(level: &Level, k: usize) -> Result<(Estimate, usize, f64)> {
    let n = level.rates.len();
    let outer: Vec<usize> = (0..k).chain(n - k..n).collect();
    let base = outer.iter().map(|&j| level.rates[j]).sum::<f64>() / outer.len() as f64;
    let base_var = outer.iter().map(|&j| level.vars[j]).sum::<f64>() / (outer.len() as f64).powi(2);
    let mut jmin = 0;
    for j in 0..n {
        if level.rates[j] < level.rates[jmin] {
            jmin = j;
        }
    }
    let m = level.rates[jmin];
    let v = 1.0 - m / base;
    let var = level.vars[jmin] / (base * base) + (m / (base * base)).powi(2) * base_var;
    Ok((
        Estimate::new(v, var.sqrt()),
        jmin,
        base_var.sqrt() / base.abs().max(f64::MIN_POSITIVE),
    ))
}

/// Raw, background-subtracted and accidental-corrected visibilities
/// V = 1 − C_min/C̄_baseline, with the baseline taken as the mean of the
/// outer 20 % of scan points on each side.
pub fn hom_analysis(scan: &[HomScanPoint], background: &BackgroundRun, singles: &SinglesRates) -> Result<HomAnalysis> {
    if scan.len() < 5 {
        return Err(Error::Baseline(format!(
            "scan has {} points, need at least 5",
            scan.len()
        )));
    }
    if scan.iter().any(|p| p.pulses == 0) || background.pulses == 0 {
        return Err(Error::InvalidArgument("every run needs a positive pulse count".into()));
    }
    let mut order: Vec<usize> = (0..scan.len()).collect();
    order.sort_by(|&a, &b| scan[a].delay_ps.total_cmp(&scan[b].delay_ps));
    let pts: Vec<HomScanPoint> = order.iter().map(|&j| scan[j]).collect();
    let k = ((pts.len() as f64 * 0.2).floor() as usize).max(1);

    let raw_rates: Vec<f64> = pts.iter().map(|p| p.coincidences as f64 / p.pulses as f64).collect();
    let raw_vars: Vec<f64> = pts
        .iter()
        .map(|p| p.coincidences.max(1) as f64 / (p.pulses as f64).powi(2))
        .collect();
    let b = background.coincidences as f64 / background.pulses as f64;
    let b_var = background.coincidences.max(1) as f64 / (background.pulses as f64).powi(2);
    let acc = singles.accidentals_per_pulse();

    let raw = Level {
        rates: raw_rates.clone(),
        vars: raw_vars.clone(),
    };
    let sub = Level {
        rates: raw_rates.iter().map(|r| r - b).collect(),
        vars: raw_vars.iter().map(|v| v + b_var).collect(),
    };
    let cor = Level {
        rates: raw_rates.iter().map(|r| r - b - acc).collect(),
        vars: sub.vars.clone(),
    };

    // The plateau must stand clear of the background before any level is quoted.
    let outer: Vec<usize> = (0..k).chain(pts.len() - k..pts.len()).collect();
    let base_sub = outer.iter().map(|&j| sub.rates[j]).sum::<f64>() / outer.len() as f64;
    let base_sub_sigma = (outer.iter().map(|&j| sub.vars[j]).sum::<f64>()).sqrt() / outer.len() as f64;
    if !(base_sub > 3.0 * base_sub_sigma) || !(outer.iter().map(|&j| cor.rates[j]).sum::<f64>() > 0.0) {
        return Err(Error::Baseline(
            "background-subtracted baseline is not significantly above zero".into(),
        ));
    }

    let (v_raw, _, _) = visibility_of(&raw, k)?;
    let (v_sub, _, _) = visibility_of(&sub, k)?;
    let (v_cor, jmin, _) = visibility_of(&cor, k)?;
    Ok(HomAnalysis {
        raw: v_raw,
        background_subtracted: v_sub,
        accidental_corrected: v_cor,
        dip_delay_ps: pts[jmin].delay_ps,
        corrected_rates: cor.rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(dip: u64, base: u64) -> Vec<HomScanPoint> {
        (0..11)
            .map(|j| HomScanPoint {
                delay_ps: (j as f64 - 5.0) * 100.0,
                coincidences: if j == 5 { dip } else { base },
                pulses: 1_000_000,
            })
            .collect()
    }

    #[test]
    fn perfect_dip() {
        let none = SinglesRates {
            photon_hz: [0.0; 2],
            background_hz: [0.0; 2],
            period_s: 1e-6,
        };
        let bg = BackgroundRun {
            coincidences: 0,
            pulses: 1_000_000,
        };
        let a = hom_analysis(&scan(0, 1000), &bg, &none).unwrap();
        assert_eq!(a.raw.value, 1.0);
        assert_eq!(a.accidental_corrected.value, 1.0);
        assert_eq!(a.dip_delay_ps, 0.0);
    }

    #[test]
    fn corrections_raise_visibility() {
        let singles = SinglesRates {
            photon_hz: [2e3, 2e3],
            background_hz: [500.0, 500.0],
            period_s: 1.0 / 456e3,
        };
        let bg = BackgroundRun {
            coincidences: 20,
            pulses: 1_000_000,
        };
        let a = hom_analysis(&scan(150, 1000), &bg, &singles).unwrap();
        assert!(a.raw.value < a.background_subtracted.value);
        assert!(a.background_subtracted.value < a.accidental_corrected.value);
        assert!(a.raw.sigma > 0.0);
    }

    #[test]
    fn background_only_fails() {
        let singles = SinglesRates {
            photon_hz: [0.0; 2],
            background_hz: [500.0; 2],
            period_s: 1e-6,
        };
        let bg = BackgroundRun {
            coincidences: 100,
            pulses: 1_000_000,
        };
        assert!(matches!(
            hom_analysis(&scan(100, 100), &bg, &singles),
            Err(Error::Baseline(_))
        ));
        assert!(matches!(
            hom_analysis(&scan(0, 10)[..4], &bg, &singles),
            Err(Error::Baseline(_))
        ));
    }
}
