//! Synthetic experiment runs: spectrometer time-tag streams, HOM coincidence
//! scans, TES photon-number records and start-stop correlation streams.
//!
//! Every pulse draws from its own ChaCha stream keyed by (seed, stage, pulse
//! index), so outputs are bit-identical for any thread count.

mod correlation;
mod hom;
mod source;
mod tagrun;
mod tes;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

pub use correlation::{correlation_g2, simulate_correlation_run, CorrelationKind};
pub use hom::{simulate_hom_run, BackgroundCounts, HomCounts, HomRun};
pub use source::{simulate_pair_source, FrequencySampling, PairEmission, PairSource, PairStatistics};
pub use tagrun::simulate_tag_run;
pub use tes::{
    g2_from_tes, photon_number_histogram, read_tes_csv, simulate_tes_run, write_tes_csv, TesInput, TesRecord,
};

use crate::error::{Error, Result};
use crate::jsa::SpectralFilter;
use crate::tags::{DemuxConfig, WavelengthMap};
use crate::tof::{Branch, DetectorModel, DispersionModel};

/// Ti:sapphire oscillator repetition rate.
pub const OSCILLATOR_RATE_HZ: f64 = 76e6;
/// Cavity-dumped rate used for spectrometer and HOM runs.
pub const CAVITY_DUMPED_RATE_HZ: f64 = 456e3;
/// Cavity-dumped rate used for TES photon-number runs.
pub const TES_RATE_HZ: f64 = 360e3;

pub(crate) mod stage {
    pub const PAIRS: u64 = 1;
    pub const HOM: u64 = 2;
    pub const HOM_BACKGROUND: u64 = 3;
    pub const TES: u64 = 4;
    pub const CORRELATION: u64 = 5;
}

/// Generator for item `index` of simulation stage `stage`.
pub(crate) fn stream_rng(seed: u64, stage: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Poisson draw that accepts a zero mean.
pub(crate) fn poisson<R: rand::Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean > 0.0 {
        let x: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
        x as u64
    } else {
        0
    }
}

pub(crate) fn binomial<R: rand::Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    rand_distr::Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Index of the first cumulative value above `u`; the last index absorbs
/// any truncated tail.
pub(crate) fn sample_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

/// Fiber time-of-flight spectrometer: both polarizations share one detector,
/// the idler behind an extra delay line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrometer {
    pub signal: DispersionModel,
    pub idler: DispersionModel,
    /// Clock edge to arrival of fold-point light on the signal path.
    pub latency_ps: f64,
    pub idler_delay_ps: f64,
}

impl Default for Spectrometer {
    fn default() -> Self {
        Self {
            signal: DispersionModel::signal_path(),
            idler: DispersionModel::idler_path(),
            latency_ps: 50_000.0,
            idler_delay_ps: 180_000.0,
        }
    }
}

impl Spectrometer {
    /// Widest demultiplexing window (at most 20 ns) that keeps the signal
    /// and idler windows apart modulo the clock period.
    pub fn demux_config(&self, channel: u16, clock_period_ps: f64) -> DemuxConfig {
        let shift = self.idler_delay_ps.rem_euclid(clock_period_ps);
        let room = shift.min(clock_period_ps - shift);
        DemuxConfig {
            channel,
            latency_ps: self.latency_ps,
            idler_delay_ps: self.idler_delay_ps,
            window_start_ps: -300.0,
            window_width_ps: (0.95 * room).min(20_000.0),
        }
    }

    pub fn maps(&self) -> (WavelengthMap, WavelengthMap) {
        (
            WavelengthMap::new(self.signal.clone(), Branch::AboveFold),
            WavelengthMap::new(self.idler.clone(), Branch::AboveFold),
        )
    }
}

/// Everything a synthetic run needs besides the run kind.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub repetition_rate_hz: f64,
    pub n_pulses: u64,
    pub source: PairSource,
    /// Signal and idler filters; `None` passes everything.
    pub filters: Option<(SpectralFilter, SpectralFilter)>,
    /// Click detectors: the spectrometer uses the first, correlation runs the
    /// first two (the first is reused when only one is given).
    pub detectors: Vec<DetectorModel>,
    pub tes_efficiencies: [f64; 2],
    /// Mean detected background counts per detector per pulse.
    pub background_rate_per_pulse: f64,
    pub seed: u64,
    pub hom_delays_ps: Option<Vec<f64>>,
    pub spectrometer: Spectrometer,
}

impl RunConfig {
    /// Default surroundings: 8.6 nm top-hat filters at 1570 nm, one
    /// nanowire detector, TES efficiencies 0.95 and 0.73, no background.
    pub fn new(source: PairSource, repetition_rate_hz: f64, n_pulses: u64, seed: u64) -> Self {
        Self {
            repetition_rate_hz,
            n_pulses,
            source,
            filters: Some((SpectralFilter::standard_top_hat(), SpectralFilter::standard_top_hat())),
            detectors: vec![DetectorModel::snspd()],
            tes_efficiencies: [0.95, 0.73],
            background_rate_per_pulse: 0.0,
            seed,
            hom_delays_ps: None,
            spectrometer: Spectrometer::default(),
        }
    }

    pub fn clock_period_ps(&self) -> f64 {
        1e12 / self.repetition_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.repetition_rate_hz.is_finite() && self.repetition_rate_hz > 0.0) {
            return Err(Error::config("repetition_rate", "must be positive"));
        }
        if self.clock_period_ps() < 1.0 {
            return Err(Error::config("repetition_rate", "clock period below 1 ps"));
        }
        if self.n_pulses == 0 {
            return Err(Error::config("n_pulses", "must be positive"));
        }
        if self.detectors.is_empty() {
            return Err(Error::config("detectors", "at least one detector required"));
        }
        for d in &self.detectors {
            d.validate()?;
        }
        for (key, e) in [
            ("tes_efficiency_c", self.tes_efficiencies[0]),
            ("tes_efficiency_d", self.tes_efficiencies[1]),
        ] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(key, format!("must lie in [0, 1], got {e}")));
            }
        }
        let b = self.background_rate_per_pulse;
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::config("background_rate", "must be non-negative"));
        }
        if let Some((s, i)) = &self.filters {
            s.validate()?;
            i.validate()?;
        }
        if let Some(d) = &self.hom_delays_ps {
            if d.iter().any(|x| !x.is_finite()) {
                return Err(Error::config("hom_delays", "delays must be finite"));
            }
        }
        let sp = &self.spectrometer;
        if !(sp.latency_ps.is_finite()
            && sp.latency_ps >= 0.0
            && sp.idler_delay_ps.is_finite()
            && sp.idler_delay_ps >= 0.0)
        {
            return Err(Error::config("latency", "latency and idler delay must be non-negative"));
        }
        Ok(())
    }

    pub(crate) fn transmissions(&self, pair: &PairEmission) -> (f64, f64) {
        match &self.filters {
            Some((s, i)) => (
                s.transmission(pair.signal_wavelength()),
                i.transmission(pair.idler_wavelength()),
            ),
            None => (1.0, 1.0),
        }
    }

    pub(crate) fn detector(&self, k: usize) -> &DetectorModel {
        self.detectors.get(k).unwrap_or(&self.detectors[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_sampling_edges() {
        let cdf = [0.5, 0.8, 0.999];
        assert_eq!(sample_cdf(&cdf, 0.0), 0);
        assert_eq!(sample_cdf(&cdf, 0.5), 1);
        assert_eq!(sample_cdf(&cdf, 0.9), 2);
        assert_eq!(sample_cdf(&cdf, 0.9999), 2);
    }

    #[test]
    fn streams_are_independent_of_order() {
        use rand::Rng;
        let a: u64 = stream_rng(7, stage::PAIRS, 12).random();
        let _: u64 = stream_rng(7, stage::PAIRS, 11).random();
        let b: u64 = stream_rng(7, stage::PAIRS, 12).random();
        let c: u64 = stream_rng(7, stage::HOM, 12).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn demux_windows_fit_both_rates() {
        let sp = Spectrometer::default();
        for rate in [OSCILLATOR_RATE_HZ, CAVITY_DUMPED_RATE_HZ] {
            let period = 1e12 / rate;
            sp.demux_config(0, period).validate(period).unwrap();
        }
    }
}
