use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_cdf, stage, stream_rng, RunConfig};
use crate::error::{Error, Result};
use crate::jsa::{schmidt_decompose, JointSpectralAmplitude, SchmidtDecomposition};
use crate::photon::{multimode_joint_pn, nmax_for_tail, SqueezerSpec};
use crate::units::omega_to_wavelength;

/// Schmidt weight left out when truncating the mode list.
const MODE_TAIL: f64 = 1e-9;
const MAX_MODES: usize = 64;

/// How pair frequencies are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencySampling {
    /// Every pair from the full joint spectral density |Ψ|², pair count from
    /// the multimode number distribution.
    Coherent,
    /// Per Schmidt mode: geometric pair count and frequencies from
    /// |ψ_n(ω_s)|²·|φ_n(ω_i)|². Drops the cross-mode interference terms of
    /// |Ψ|², so joint histograms look more separable than the source.
    ModeProduct,
}

/// Pair-number statistics per pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatistics {
    Thermal,
    /// Exactly one pair per pulse, for single-pair reference runs.
    SinglePair,
}

/// One down-converted pair; `mode` is set only by mode-product sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairEmission {
    pub mode: Option<u32>,
    pub omega_s: f64,
    pub omega_i: f64,
}

impl PairEmission {
    /// Signal wavelength in metres.
    pub fn signal_wavelength(&self) -> f64 {
        omega_to_wavelength(self.omega_s)
    }

    pub fn idler_wavelength(&self) -> f64 {
        omega_to_wavelength(self.omega_i)
    }
}

#[derive(Clone, Debug)]
struct ModeSampler {
    mean: f64,
    signal: WeightedAliasIndex<f64>,
    idler: WeightedAliasIndex<f64>,
}

/// Pair generator prepared from a joint spectral amplitude and a gain.
#[derive(Clone, Debug)]
pub struct PairSource {
    jsa: JointSpectralAmplitude,
    decomposition: SchmidtDecomposition,
    squeezer: SqueezerSpec,
    sampling: FrequencySampling,
    statistics: PairStatistics,
    count_cdf: Vec<f64>,
    cells: WeightedAliasIndex<f64>,
    modes: Vec<ModeSampler>,
}

impl PairSource {
    /// `mean_photons` is the mean number of pairs per pulse summed over all
    /// Schmidt modes.
    pub fn new(
        jsa: JointSpectralAmplitude,
        mean_photons: f64,
        sampling: FrequencySampling,
        statistics: PairStatistics,
    ) -> Result<Self> {
        let decomposition = schmidt_decompose(&jsa)?;
        let keep = decomposition.modes_for_tail(MODE_TAIL).min(MAX_MODES);
        let kept = &decomposition.weights()[..keep];
        let sum: f64 = kept.iter().sum();
        let weights: Vec<f64> = kept.iter().map(|w| w / sum).collect();
        let squeezer = SqueezerSpec::multimode(mean_photons, weights);
        let means = squeezer.mode_means()?;

        let nmax = nmax_for_tail(mean_photons, 1e-12).max(4);
        let pn = multimode_joint_pn(&squeezer, nmax)?;
        let mut acc = 0.0;
        let count_cdf = (0..=nmax)
            .map(|n| {
                acc += pn.get(n, n);
                acc
            })
            .collect();

        let grid = jsa.grid();
        let p = jsa.cell_probabilities();
        let flat: Vec<f64> = (0..grid.n_s())
            .flat_map(|j| (0..grid.n_i()).map(move |k| (j, k)))
            .map(|(j, k)| p[(j, k)])
            .collect();
        let cells = WeightedAliasIndex::new(flat).map_err(|e| Error::Numeric(e.to_string()))?;

        let modes = if sampling == FrequencySampling::ModeProduct {
            (0..keep)
                .map(|n| {
                    let s = decomposition
                        .signal_modes()
                        .column(n)
                        .iter()
                        .map(|z| z.norm_sqr())
                        .collect();
                    let i = decomposition
                        .idler_modes()
                        .column(n)
                        .iter()
                        .map(|z| z.norm_sqr())
                        .collect();
                    Ok(ModeSampler {
                        mean: means[n],
                        signal: WeightedAliasIndex::new(s).map_err(|e| Error::Numeric(e.to_string()))?,
                        idler: WeightedAliasIndex::new(i).map_err(|e| Error::Numeric(e.to_string()))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };

        Ok(Self {
            jsa,
            decomposition,
            squeezer,
            sampling,
            statistics,
            count_cdf,
            cells,
            modes,
        })
    }

    pub fn jsa(&self) -> &JointSpectralAmplitude {
        &self.jsa
    }

    pub fn decomposition(&self) -> &SchmidtDecomposition {
        &self.decomposition
    }

    /// Gain and truncated, renormalized Schmidt weights.
    pub fn squeezer(&self) -> &SqueezerSpec {
        &self.squeezer
    }

    pub fn sampling(&self) -> FrequencySampling {
        self.sampling
    }

    pub fn statistics(&self) -> PairStatistics {
        self.statistics
    }

    pub fn mean_photons(&self) -> f64 {
        self.squeezer.mean_total_photons
    }

    /// Total pair count for one pulse under coherent sampling.
    pub(crate) fn draw_count<R: Rng>(&self, rng: &mut R) -> usize {
        match self.statistics {
            PairStatistics::SinglePair => 1,
            PairStatistics::Thermal => sample_cdf(&self.count_cdf, rng.random::<f64>()),
        }
    }

    fn draw_cell<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let grid = self.jsa.grid();
        let c = self.cells.sample(rng);
        let (j, k) = (c / grid.n_i(), c % grid.n_i());
        let ws = grid.signal_omega(j) + (rng.random::<f64>() - 0.5) * grid.ds();
        let wi = grid.idler_omega(k) + (rng.random::<f64>() - 0.5) * grid.di();
        (ws, wi)
    }

    fn draw_mode_pair<R: Rng>(&self, n: usize, rng: &mut R) -> PairEmission {
        let grid = self.jsa.grid();
        let m = &self.modes[n];
        let j = m.signal.sample(rng);
        let k = m.idler.sample(rng);
        PairEmission {
            mode: Some(n as u32),
            omega_s: grid.signal_omega(j) + (rng.random::<f64>() - 0.5) * grid.ds(),
            omega_i: grid.idler_omega(k) + (rng.random::<f64>() - 0.5) * grid.di(),
        }
    }

    /// Appends one pulse's pairs to `out`.
    pub(crate) fn emit<R: Rng>(&self, rng: &mut R, out: &mut Vec<PairEmission>) {
        match self.sampling {
            FrequencySampling::Coherent => {
                for _ in 0..self.draw_count(rng) {
                    let (omega_s, omega_i) = self.draw_cell(rng);
                    out.push(PairEmission {
                        mode: None,
                        omega_s,
                        omega_i,
                    });
                }
            }
            FrequencySampling::ModeProduct => match self.statistics {
                PairStatistics::SinglePair => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let w = &self.squeezer.schmidt_weights;
                    let n = w.iter().position(|x| {
                        acc += x;
                        acc > u
                    });
                    out.push(self.draw_mode_pair(n.unwrap_or(w.len() - 1), rng));
                }
                PairStatistics::Thermal => {
                    for n in 0..self.modes.len() {
                        let mu = self.modes[n].mean;
                        if mu <= 0.0 {
                            continue;
                        }
                        // Geometric by inversion: P(count ≥ c) = qᶜ.
                        let q = mu / (1.0 + mu);
                        let u: f64 = 1.0 - rng.random::<f64>();
                        let count = (u.ln() / q.ln()).floor() as usize;
                        for _ in 0..count {
                            out.push(self.draw_mode_pair(n, rng));
                        }
                    }
                }
            },
        }
    }
}

/// Pairs emitted by every pulse of the run.
pub fn simulate_pair_source(cfg: &RunConfig) -> Result<Vec<Vec<PairEmission>>> {
    cfg.validate()?;
    Ok((0..cfg.n_pulses)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, stage::PAIRS, k);
            let mut out = Vec::new();
            cfg.source.emit(&mut rng, &mut out);
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsa::{build_jsa, SourceConfig};
    use crate::montecarlo::CAVITY_DUMPED_RATE_HZ;

    fn source(mean: f64, sampling: FrequencySampling) -> PairSource {
        let cfg = SourceConfig::default();
        let jsa = build_jsa(&cfg, &cfg.default_grid(48).unwrap()).unwrap();
        PairSource::new(jsa, mean, sampling, PairStatistics::Thermal).unwrap()
    }

    #[test]
    fn zero_gain_emits_nothing() {
        for s in [FrequencySampling::Coherent, FrequencySampling::ModeProduct] {
            let cfg = RunConfig::new(source(0.0, s), CAVITY_DUMPED_RATE_HZ, 2000, 1);
            assert!(simulate_pair_source(&cfg).unwrap().iter().all(|p| p.is_empty()));
        }
    }

    #[test]
    fn mean_pair_number_matches_gain() {
        for s in [FrequencySampling::Coherent, FrequencySampling::ModeProduct] {
            let cfg = RunConfig::new(source(0.3, s), CAVITY_DUMPED_RATE_HZ, 40_000, 5);
            let run = simulate_pair_source(&cfg).unwrap();
            let n: usize = run.iter().map(|p| p.len()).sum();
            let mean = n as f64 / 40_000.0;
            // Thermal-like variance μ(1+μ) bounds the spread.
            let sigma = (0.3f64 * 1.3 / 40_000.0).sqrt();
            assert!((mean - 0.3).abs() < 5.0 * sigma, "{s:?}: {mean}");
        }
    }

    #[test]
    fn pairs_lie_on_the_grid() {
        let cfg = RunConfig::new(source(0.5, FrequencySampling::Coherent), CAVITY_DUMPED_RATE_HZ, 500, 3);
        let grid = cfg.source.jsa().grid().clone();
        let (lo, hi) = grid.signal_bounds();
        for p in simulate_pair_source(&cfg).unwrap().iter().flatten() {
            assert!(p.omega_s >= lo - grid.ds() && p.omega_s <= hi + grid.ds());
            assert!(p.mode.is_none());
        }
    }
}
