use nalgebra::DMatrix;
use serde::Serialize;

use super::demux::{PulseTag, PulseTags};
use crate::error::{Error, Result};
use crate::jsa::effective_mode_number_of_matrix;
use crate::tof::{Branch, DispersionModel};
use crate::units::FWHM_PER_SIGMA;

/// Histogram bin edges, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bins {
    edges: Vec<f64>,
}

impl Bins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("bin edges must be strictly increasing".into()));
        }
        Ok(Self { edges })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(hi > lo) {
            return Err(Error::InvalidArgument(format!("bad uniform bins [{lo}, {hi}] x {n}")));
        }
        Self::new((0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect())
    }

    /// Bins of width `width` centred on `center` covering ±`half_span`.
    pub fn centered(center: f64, half_span: f64, width: f64) -> Result<Self> {
        let n = ((2.0 * half_span) / width).round().max(1.0) as usize;
        let lo = center - 0.5 * n as f64 * width;
        Self::uniform(lo, lo + n as f64 * width, n)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Index of the half-open bin [e_k, e_{k+1}) containing `x`; the last
    /// bin also includes its upper edge.
    pub fn index(&self, x: f64) -> Option<usize> {
        let last = *self.edges.last().expect("at least two edges");
        if !(x >= self.edges[0] && x <= last) {
            return None;
        }
        let k = self.edges.partition_point(|e| *e <= x);
        Some(k.saturating_sub(1).min(self.len() - 1))
    }
}

/// Shortest wavelength expected on the far side of the fold by default.
pub const DEFAULT_ALIAS_LIMIT_NM: f64 = 1200.0;

/// Delay-to-wavelength mapping of one spectrometer path.
///
/// `alias_limit_nm` is the farthest wavelength on the opposite branch that
/// light is expected from; delays it can produce are ambiguous and go to the
/// alias bucket. `None` uses the model's full range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WavelengthMap {
    pub dispersion: DispersionModel,
    pub branch: Branch,
    pub alias_limit_nm: Option<f64>,
}

/// Outcome of mapping one tag delay onto a wavelength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mapped {
    Wavelength(f64),
    /// The delay is reachable from both sides of the fold.
    Alias,
    /// Negative relative delay or beyond the model range.
    Unphysical,
}

impl WavelengthMap {
    /// Above-fold mapping with the default alias limit.
    pub fn new(dispersion: DispersionModel, branch: Branch) -> Self {
        let alias_limit_nm = match branch {
            Branch::AboveFold => Some(DEFAULT_ALIAS_LIMIT_NM.max(dispersion.range_nm.0)),
            Branch::BelowFold => None,
        };
        Self {
            dispersion,
            branch,
            alias_limit_nm,
        }
    }

    /// Largest relative delay that the opposite branch can also produce.
    pub fn alias_limit_ps(&self) -> f64 {
        let d = &self.dispersion;
        let end = match (self.branch, self.alias_limit_nm) {
            (_, Some(l)) => l.clamp(d.range_nm.0, d.range_nm.1),
            (Branch::AboveFold, None) => d.range_nm.0,
            (Branch::BelowFold, None) => d.range_nm.1,
        };
        d.delay_above_minimum(end)
    }

    /// Maps a delay relative to the fold-point arrival.
    pub fn map(&self, delay_ps: f64) -> Mapped {
        if delay_ps < 0.0 {
            return Mapped::Unphysical;
        }
        if delay_ps <= self.alias_limit_ps() {
            return Mapped::Alias;
        }
        let d = &self.dispersion;
        match d.delay_to_wavelength(d.min_delay() + delay_ps, self.branch) {
            Ok(l) => Mapped::Wavelength(l),
            Err(_) => Mapped::Unphysical,
        }
    }

    /// Relative delay of a wavelength, the forward model of [`Self::map`].
    pub fn delay_of(&self, lambda_nm: f64) -> Result<f64> {
        self.dispersion.wavelength_to_delay(lambda_nm)?;
        Ok(self.dispersion.delay_above_minimum(lambda_nm))
    }
}

/// Wavelength histogram of single detections.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinglesSpectrum {
    pub bins: Bins,
    pub counts: Vec<u64>,
    pub alias: u64,
    pub unphysical: u64,
    pub outside_bins: u64,
}

impl SinglesSpectrum {
    pub fn binned(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.binned() + self.alias + self.unphysical + self.outside_bins
    }

    pub fn mean_nm(&self) -> f64 {
        let c = self.bins.centers();
        let n = self.binned() as f64;
        self.counts.iter().zip(&c).map(|(k, x)| *k as f64 * x).sum::<f64>() / n
    }

    pub fn std_nm(&self) -> f64 {
        let c = self.bins.centers();
        let m = self.mean_nm();
        let n = self.binned() as f64;
        (self
            .counts
            .iter()
            .zip(&c)
            .map(|(k, x)| *k as f64 * (x - m).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    }

    /// FWHM of a Gaussian with the histogram's second moment.
    pub fn gaussian_fwhm_nm(&self) -> f64 {
        FWHM_PER_SIGMA * self.std_nm()
    }

    pub fn peak_nm(&self) -> f64 {
        let c = self.bins.centers();
        let mut best = 0;
        for (k, v) in self.counts.iter().enumerate() {
            if *v > self.counts[best] {
                best = k;
            }
        }
        c[best]
    }
}

/// Maps tags through the dispersion model and histograms the wavelengths.
pub fn singles_spectrum(tags: &[PulseTag], map: &WavelengthMap, bins: &Bins) -> SinglesSpectrum {
    let mut s = SinglesSpectrum {
        bins: bins.clone(),
        counts: vec![0; bins.len()],
        alias: 0,
        unphysical: 0,
        outside_bins: 0,
    };
    for t in tags {
        match map.map(t.delay_ps) {
            Mapped::Wavelength(l) => match bins.index(l) {
                Some(k) => s.counts[k] += 1,
                None => s.outside_bins += 1,
            },
            Mapped::Alias => s.alias += 1,
            Mapped::Unphysical => s.unphysical += 1,
        }
    }
    s
}

/// Coincidence histogram over signal (rows) and idler (columns) wavelength.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram2D {
    pub signal_bins: Bins,
    pub idler_bins: Bins,
    #[serde(skip)]
    pub counts: DMatrix<u64>,
}

impl Histogram2D {
    pub fn zeros(signal_bins: Bins, idler_bins: Bins) -> Self {
        let counts = DMatrix::zeros(signal_bins.len(), idler_bins.len());
        Self {
            signal_bins,
            idler_bins,
            counts,
        }
    }

    pub fn from_counts(signal_bins: Bins, idler_bins: Bins, counts: DMatrix<u64>) -> Result<Self> {
        if counts.nrows() != signal_bins.len() || counts.ncols() != idler_bins.len() {
            return Err(Error::GridMismatch("counts do not match bin edges".into()));
        }
        Ok(Self {
            signal_bins,
            idler_bins,
            counts,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Square-root amplitude √counts.
    pub fn amplitude(&self) -> DMatrix<f64> {
        self.counts.map(|c| (c as f64).sqrt())
    }

    /// K_ABS of the measured |Ψ| estimate √counts.
    pub fn k_abs(&self) -> Result<f64> {
        if self.total() == 0 {
            return Err(Error::InvalidArgument("empty histogram".into()));
        }
        effective_mode_number_of_matrix(&self.amplitude())
    }

    pub fn signal_marginal(&self) -> Vec<u64> {
        self.counts.row_iter().map(|r| r.iter().sum()).collect()
    }

    pub fn idler_marginal(&self) -> Vec<u64> {
        self.counts.column_iter().map(|c| c.iter().sum()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JointSpectrum {
    pub histogram: Histogram2D,
    /// Pulses with at least one tag in each stream.
    pub coincident_pulses: u64,
    /// Coincident pulses with more than one tag in either stream.
    pub multi_tag_pulses: u64,
    /// Signal-idler pairings that could not be binned.
    pub unbinned_pairs: u64,
}

/// Per-pulse coincidences binned in (λ_s, λ_i). Pulses with several tags
/// contribute every signal-idler pairing and are counted in
/// `multi_tag_pulses`.
pub fn joint_spectrum(
    signal: &PulseTags,
    idler: &PulseTags,
    maps: (&WavelengthMap, &WavelengthMap),
    bins: (&Bins, &Bins),
) -> Result<JointSpectrum> {
    if signal.n_pulses != idler.n_pulses || (signal.clock_period_ps - idler.clock_period_ps).abs() > 1e-6 {
        return Err(Error::StreamAlignment(format!(
            "signal covers {} pulses, idler {}",
            signal.n_pulses, idler.n_pulses
        )));
    }
    signal.check_sorted()?;
    idler.check_sorted()?;
    let mut hist = Histogram2D::zeros(bins.0.clone(), bins.1.clone());
    let mut out = JointSpectrum {
        histogram: Histogram2D::zeros(bins.0.clone(), bins.1.clone()),
        coincident_pulses: 0,
        multi_tag_pulses: 0,
        unbinned_pairs: 0,
    };
    let bin_of = |t: &PulseTag, map: &WavelengthMap, b: &Bins| match map.map(t.delay_ps) {
        Mapped::Wavelength(l) => b.index(l),
        _ => None,
    };
    let (s, i) = (&signal.tags, &idler.tags);
    let (mut a, mut b) = (0, 0);
    while a < s.len() && b < i.len() {
        let (ka, kb) = (s[a].clock_index, i[b].clock_index);
        if ka < kb {
            a += 1;
            continue;
        }
        if kb < ka {
            b += 1;
            continue;
        }
        let a_end = a + s[a..].iter().take_while(|t| t.clock_index == ka).count();
        let b_end = b + i[b..].iter().take_while(|t| t.clock_index == ka).count();
        out.coincident_pulses += 1;
        if a_end - a > 1 || b_end - b > 1 {
            out.multi_tag_pulses += 1;
        }
        for ts in &s[a..a_end] {
            let rs = bin_of(ts, maps.0, bins.0);
            for ti in &i[b..b_end] {
                match (rs, bin_of(ti, maps.1, bins.1)) {
                    (Some(r), Some(c)) => hist.counts[(r, c)] += 1,
                    _ => out.unbinned_pairs += 1,
                }
            }
        }
        a = a_end;
        b = b_end;
    }
    out.histogram = hist;
    Ok(out)
}

/// Tags whose pulse also holds a tag in `other`.
pub fn coincident_subset(tags: &PulseTags, other: &PulseTags) -> Vec<PulseTag> {
    let mut out = Vec::new();
    let mut j = 0;
    for t in &tags.tags {
        while j < other.tags.len() && other.tags[j].clock_index < t.clock_index {
            j += 1;
        }
        if j < other.tags.len() && other.tags[j].clock_index == t.clock_index {
            out.push(*t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maps() -> (WavelengthMap, WavelengthMap) {
        (
            WavelengthMap::new(DispersionModel::signal_path(), Branch::AboveFold),
            WavelengthMap::new(DispersionModel::idler_path(), Branch::AboveFold),
        )
    }

    #[test]
    fn bins_indexing() {
        let b = Bins::uniform(0.0, 10.0, 5).unwrap();
        assert_eq!(b.index(0.0), Some(0));
        assert_eq!(b.index(1.999), Some(0));
        assert_eq!(b.index(2.0), Some(1));
        assert_eq!(b.index(10.0), Some(4));
        assert_eq!(b.index(10.1), None);
        assert!(Bins::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn map_buckets() {
        let (m, _) = maps();
        assert_eq!(m.map(-5.0), Mapped::Unphysical);
        assert_eq!(m.map(10.0), Mapped::Alias);
        // 1200 nm light and its above-fold image share a delay.
        let image = m.alias_limit_ps();
        assert!((image - m.delay_of(1200.0).unwrap()).abs() < 1e-9);
        let d = m.delay_of(1570.0).unwrap();
        match m.map(d) {
            Mapped::Wavelength(l) => assert!((l - 1570.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        assert_eq!(m.map(1e9), Mapped::Unphysical);
    }

    #[test]
    fn joint_counts_pairings() {
        let (ms, mi) = maps();
        let bins = Bins::uniform(1560.0, 1580.0, 20).unwrap();
        let tag = |k: u64, l: f64, m: &WavelengthMap| PulseTag {
            clock_index: k,
            delay_ps: m.delay_of(l).unwrap(),
            flags: 0,
        };
        let signal = PulseTags {
            n_pulses: 10,
            clock_period_ps: 1000.0,
            tags: vec![tag(1, 1565.5, &ms), tag(3, 1570.5, &ms), tag(3, 1571.5, &ms)],
        };
        let idler = PulseTags {
            n_pulses: 10,
            clock_period_ps: 1000.0,
            tags: vec![tag(2, 1565.5, &mi), tag(3, 1569.5, &mi)],
        };
        let j = joint_spectrum(&signal, &idler, (&ms, &mi), (&bins, &bins)).unwrap();
        assert_eq!(j.coincident_pulses, 1);
        assert_eq!(j.multi_tag_pulses, 1);
        assert_eq!(j.histogram.total(), 2);
        assert_eq!(j.histogram.counts[(10, 9)], 1);
        assert_eq!(j.histogram.counts[(11, 9)], 1);
        let bad = PulseTags { n_pulses: 11, ..idler };
        assert!(matches!(
            joint_spectrum(&signal, &bad, (&ms, &mi), (&bins, &bins)),
            Err(Error::StreamAlignment(_))
        ));
    }
}
