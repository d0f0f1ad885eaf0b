//! Experiment configuration: a TOML file of `[section]` tables whose
//! quantities are strings such as `"2 mm"` or bare numbers. Quantities are
//! converted to SI on read, unknown keys are rejected, and every error names
//! the offending key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jsa::{build_jsa, FrequencyGrid, JointSpectralAmplitude, SourceConfig, SpectralFilter};
use crate::montecarlo::{
    CorrelationKind, FrequencySampling, PairSource, PairStatistics, RunConfig, Spectrometer, TesInput,
    CAVITY_DUMPED_RATE_HZ,
};
use crate::tags::Bins;
use crate::tof::{DetectorModel, DispersionModel};
use crate::units::NM;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Length,
    Frequency,
    Time,
    /// Group-delay dispersion, s².
    Gdd,
    Plain,
}

fn unit(symbol: &str) -> Option<(Dim, f64)> {
    Some(match symbol {
        "nm" => (Dim::Length, 1e-9),
        "um" => (Dim::Length, 1e-6),
        "mm" => (Dim::Length, 1e-3),
        "m" => (Dim::Length, 1.0),
        "THz" => (Dim::Frequency, 1e12),
        "GHz" => (Dim::Frequency, 1e9),
        "MHz" => (Dim::Frequency, 1e6),
        "kHz" => (Dim::Frequency, 1e3),
        "Hz" => (Dim::Frequency, 1.0),
        "ps" => (Dim::Time, 1e-12),
        "ns" => (Dim::Time, 1e-9),
        "us" => (Dim::Time, 1e-6),
        "ms" => (Dim::Time, 1e-3),
        "s" => (Dim::Time, 1.0),
        "fs2" => (Dim::Gdd, 1e-30),
        _ => return None,
    })
}

/// Scalar entries per section, rendered as text for the unit-aware reader.
#[derive(Clone, Debug, Default)]
struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let key = e
                .span()
                .map(|s| text[s].trim().to_string())
                .unwrap_or_else(|| "config".into());
            Error::config(key, e.message().to_string())
        })?;
        let mut raw = RawConfig::default();
        for (section, body) in table {
            let toml::Value::Table(body) = body else {
                return Err(Error::config(section, "key appears outside any [section]"));
            };
            let entries = raw.sections.entry(section.clone()).or_default();
            for (key, value) in body {
                let text = match value {
                    toml::Value::String(s) => s,
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Float(f) => f.to_string(),
                    _ => {
                        return Err(Error::config(
                            format!("{section}.{key}"),
                            "expected a number or a string",
                        ))
                    }
                };
                entries.insert(key, text);
            }
        }
        Ok(raw)
    }
}

/// Typed reader that removes entries as they are consumed, so leftovers can
/// be reported as unknown keys.
struct Reader {
    raw: RawConfig,
}

impl Reader {
    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.raw.sections.get_mut(section).and_then(|s| s.remove(key))
    }

    fn quantity(&mut self, section: &str, key: &str, dim: Dim, default: f64) -> Result<f64> {
        let Some(text) = self.take(section, key) else {
            return Ok(default);
        };
        let name = format!("{section}.{key}");
        let mut parts = text.split_whitespace();
        let number = parts.next().ok_or_else(|| Error::config(&name, "missing value"))?;
        let value: f64 = number
            .parse()
            .map_err(|_| Error::config(&name, format!("`{number}` is not a number")))?;
        if !value.is_finite() {
            return Err(Error::config(&name, "must be finite"));
        }
        let factor = match (parts.next(), dim) {
            (None, Dim::Plain) => 1.0,
            (None, _) => return Err(Error::config(&name, "missing unit")),
            (Some(u), _) => match unit(u) {
                Some((d, f)) if d == dim => f,
                Some(_) => return Err(Error::config(&name, format!("unit `{u}` has the wrong dimension"))),
                None => return Err(Error::config(&name, format!("unknown unit `{u}`"))),
            },
        };
        if let Some(extra) = parts.next() {
            return Err(Error::config(&name, format!("unexpected trailing `{extra}`")));
        }
        Ok(value * factor)
    }

    fn integer(&mut self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.take(section, key) {
            None => Ok(default),
            Some(t) => t.replace('_', "").parse().map_err(|_| {
                Error::config(
                    format!("{section}.{key}"),
                    format!("`{t}` is not a non-negative integer"),
                )
            }),
        }
    }

    fn word(&mut self, section: &str, key: &str, default: &str, allowed: &[&str]) -> Result<String> {
        let v = self.take(section, key).unwrap_or_else(|| default.to_string());
        if allowed.contains(&v.as_str()) {
            Ok(v)
        } else {
            Err(Error::config(
                format!("{section}.{key}"),
                format!("`{v}` is not one of {}", allowed.join(", ")),
            ))
        }
    }

    fn path(&mut self, section: &str, key: &str) -> Option<PathBuf> {
        self.take(section, key).map(PathBuf::from)
    }

    fn finish(self) -> Result<()> {
        for (section, entries) in &self.raw.sections {
            if let Some(key) = entries.keys().next() {
                return Err(Error::config(format!("{section}.{key}"), "unknown key"));
            }
        }
        Ok(())
    }
}

/// Settings for synthetic runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSettings {
    pub repetition_rate_hz: f64,
    pub pulses: u64,
    pub mean_photons: f64,
    pub sampling: FrequencySampling,
    pub statistics: PairStatistics,
    pub seed: Option<u64>,
    pub background_rate_per_pulse: f64,
    pub tes_efficiencies: [f64; 2],
    pub hom_delay_span_ps: f64,
    pub hom_delay_points: usize,
    pub correlation: CorrelationKind,
    pub tes_input: TesInput,
}

/// Histogram and estimator settings for `analyze`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisSettings {
    pub bin_center_nm: f64,
    pub bin_half_span_nm: f64,
    pub bin_width_nm: f64,
    pub side_peaks: usize,
    pub resamples: usize,
}

impl AnalysisSettings {
    pub fn bins(&self) -> Result<Bins> {
        Bins::centered(self.bin_center_nm, self.bin_half_span_nm, self.bin_width_nm)
    }
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: SourceConfig,
    pub grid_points: usize,
    /// Grid half-width in pump bandwidths.
    pub grid_span: f64,
    pub filter: Option<SpectralFilter>,
    pub detector: DetectorModel,
    pub spectrometer: Spectrometer,
    pub run: RunSettings,
    pub analysis: AnalysisSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::parse("").expect("defaults are valid")
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // Dispersion model files are resolved relative to the config file.
        let base = path.parent().unwrap_or(Path::new("."));
        for (key, model) in [
            ("signal_model", &mut cfg.spectrometer.signal),
            ("idler_model", &mut cfg.spectrometer.idler),
        ] {
            if let Some(p) = model_paths(&text)?.remove(key) {
                let file = base.join(p);
                let t = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
                *model = DispersionModel::from_key_value(&t)?;
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader {
            raw: RawConfig::parse(text)?,
        };
        let d = SourceConfig::default();
        let s = "source";
        let source = SourceConfig {
            pump_center_wavelength: r.quantity(s, "pump_center_wavelength", Dim::Length, d.pump_center_wavelength)?,
            pump_fwhm_bandwidth: r.quantity(s, "pump_fwhm_bandwidth", Dim::Length, d.pump_fwhm_bandwidth)?,
            crystal_length: r.quantity(s, "crystal_length", Dim::Length, d.crystal_length)?,
            poling_period: r.quantity(s, "poling_period", Dim::Length, d.poling_period)?,
            group_index_pump: r.quantity(s, "group_index_pump", Dim::Plain, d.group_index_pump)?,
            group_index_signal: r.quantity(s, "group_index_signal", Dim::Plain, d.group_index_signal)?,
            group_index_idler: r.quantity(s, "group_index_idler", Dim::Plain, d.group_index_idler)?,
            signal_center_offset: r.quantity(s, "signal_center_offset", Dim::Length, d.signal_center_offset)?,
            pump_chirp: r.quantity(s, "pump_chirp", Dim::Gdd, d.pump_chirp)?,
            pump_waist: r.quantity(s, "pump_waist", Dim::Length, d.pump_waist)?,
            confocal_parameter: r.quantity(s, "confocal_parameter", Dim::Length, d.confocal_parameter)?,
        };
        source.validate().map_err(|e| prefix(e, s))?;

        let grid_points = r.integer("grid", "points", 256)? as usize;
        if grid_points < 8 {
            return Err(Error::config("grid.points", "need at least 8 points"));
        }
        let grid_span = r.quantity("grid", "span", Dim::Plain, 5.0)?;
        if !(grid_span > 0.0) {
            return Err(Error::config("grid.span", "must be positive"));
        }

        let f = "filter";
        let shape = r.word(f, "shape", "top_hat", &["top_hat", "gaussian", "none"])?;
        let center = r.quantity(f, "center_wavelength", Dim::Length, 1570.0 * NM)?;
        let bandwidth = r.quantity(f, "bandwidth", Dim::Length, 8.6 * NM)?;
        let filter = match shape.as_str() {
            "top_hat" => Some(SpectralFilter::top_hat(center, bandwidth)),
            "gaussian" => Some(SpectralFilter::gaussian(center, bandwidth)),
            _ => None,
        };
        if let Some(flt) = &filter {
            flt.validate().map_err(|e| prefix(e, f))?;
        }

        let dd = DetectorModel::snspd();
        let t = "detector";
        let detector = DetectorModel {
            jitter_fwhm_ps: r.quantity(t, "jitter_fwhm", Dim::Time, dd.jitter_fwhm_ps * 1e-12)? * 1e12,
            dark_rate_hz: r.quantity(t, "dark_rate", Dim::Frequency, dd.dark_rate_hz)?,
            efficiency: r.quantity(t, "efficiency", Dim::Plain, dd.efficiency)?,
            deadtime_ns: r.quantity(t, "deadtime", Dim::Time, dd.deadtime_ns * 1e-9)? * 1e9,
        };
        detector.validate().map_err(|e| prefix(e, t))?;

        let ds = Spectrometer::default();
        let sp = "spectrometer";
        // Model paths are only meaningful relative to a file; see from_path.
        r.path(sp, "signal_model");
        r.path(sp, "idler_model");
        let spectrometer = Spectrometer {
            latency_ps: r.quantity(sp, "latency", Dim::Time, ds.latency_ps * 1e-12)? * 1e12,
            idler_delay_ps: r.quantity(sp, "idler_delay", Dim::Time, ds.idler_delay_ps * 1e-12)? * 1e12,
            ..ds
        };

        let u = "run";
        let seed = match r.take(u, "seed") {
            None => None,
            Some(t) => Some(
                t.parse::<u64>()
                    .map_err(|_| Error::config("run.seed", format!("`{t}` is not an unsigned 64-bit integer")))?,
            ),
        };
        let run = RunSettings {
            repetition_rate_hz: r.quantity(u, "repetition_rate", Dim::Frequency, CAVITY_DUMPED_RATE_HZ)?,
            pulses: r.integer(u, "pulses", 1_000_000)?,
            mean_photons: r.quantity(u, "mean_photons", Dim::Plain, 0.11)?,
            sampling: match r
                .word(u, "sampling", "coherent", &["coherent", "mode_product"])?
                .as_str()
            {
                "coherent" => FrequencySampling::Coherent,
                _ => FrequencySampling::ModeProduct,
            },
            statistics: match r
                .word(u, "statistics", "thermal", &["thermal", "single_pair"])?
                .as_str()
            {
                "thermal" => PairStatistics::Thermal,
                _ => PairStatistics::SinglePair,
            },
            seed,
            background_rate_per_pulse: r.quantity(u, "background_rate", Dim::Plain, 0.0)?,
            tes_efficiencies: [
                r.quantity(u, "tes_efficiency_c", Dim::Plain, 0.95)?,
                r.quantity(u, "tes_efficiency_d", Dim::Plain, 0.73)?,
            ],
            hom_delay_span_ps: r.quantity(u, "hom_delay_span", Dim::Time, 4e-12)? * 1e12,
            hom_delay_points: r.integer(u, "hom_delay_points", 33)? as usize,
            correlation: match r.word(u, "correlation", "cross", &["cross", "auto", "smsv"])?.as_str() {
                "cross" => CorrelationKind::Cross,
                "auto" => CorrelationKind::Auto,
                _ => CorrelationKind::Smsv,
            },
            tes_input: match r.word(u, "tes_input", "two_mode", &["two_mode", "smsv"])?.as_str() {
                "two_mode" => TesInput::TwoMode,
                _ => TesInput::Smsv,
            },
        };
        if !(run.repetition_rate_hz > 0.0) {
            return Err(Error::config("run.repetition_rate", "must be positive"));
        }
        if run.pulses == 0 {
            return Err(Error::config("run.pulses", "must be positive"));
        }
        if !(run.mean_photons >= 0.0) {
            return Err(Error::config("run.mean_photons", "must be non-negative"));
        }
        if run.hom_delay_points < 5 {
            return Err(Error::config("run.hom_delay_points", "need at least 5 points"));
        }

        let a = "analysis";
        let analysis = AnalysisSettings {
            bin_center_nm: r.quantity(a, "bin_center", Dim::Length, 1570e-9)? * 1e9,
            bin_half_span_nm: r.quantity(a, "bin_half_span", Dim::Length, 8e-9)? * 1e9,
            bin_width_nm: r.quantity(a, "bin_width", Dim::Length, 1e-9)? * 1e9,
            side_peaks: r.integer(a, "side_peaks", 5)? as usize,
            resamples: r.integer(a, "resamples", crate::stats::DEFAULT_RESAMPLES as u64)? as usize,
        };
        analysis.bins().map_err(|e| prefix(e, a))?;
        if analysis.side_peaks == 0 {
            return Err(Error::config("analysis.side_peaks", "must be positive"));
        }

        r.finish()?;
        Ok(Self {
            source,
            grid_points,
            grid_span,
            filter,
            detector,
            spectrometer,
            run,
            analysis,
        })
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        self.source.grid_with_span(self.grid_points, self.grid_span)
    }

    pub fn jsa(&self) -> Result<JointSpectralAmplitude> {
        build_jsa(&self.source, &self.grid()?)
    }

    pub fn hom_delays_ps(&self) -> Vec<f64> {
        let n = self.run.hom_delay_points;
        let s = self.run.hom_delay_span_ps;
        (0..n).map(|k| -s + 2.0 * s * k as f64 / (n - 1) as f64).collect()
    }

    /// Monte Carlo configuration with the given seed.
    pub fn run_config(&self, seed: u64) -> Result<RunConfig> {
        let src = PairSource::new(
            self.jsa()?,
            self.run.mean_photons,
            self.run.sampling,
            self.run.statistics,
        )?;
        let mut cfg = RunConfig::new(src, self.run.repetition_rate_hz, self.run.pulses, seed);
        cfg.filters = self.filter.clone().map(|f| (f.clone(), f));
        cfg.detectors = vec![self.detector.clone()];
        cfg.tes_efficiencies = self.run.tes_efficiencies;
        cfg.background_rate_per_pulse = self.run.background_rate_per_pulse;
        cfg.hom_delays_ps = Some(self.hom_delays_ps());
        cfg.spectrometer = self.spectrometer.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn model_paths(text: &str) -> Result<BTreeMap<String, String>> {
    let raw = RawConfig::parse(text)?;
    Ok(raw
        .sections
        .get("spectrometer")
        .map(|s| {
            s.iter()
                .filter(|(k, _)| k.ends_with("_model"))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        })
        .unwrap_or_default())
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::Config { key, reason } => Error::config(format!("{section}.{key}"), reason),
        other => other,
    }
}
