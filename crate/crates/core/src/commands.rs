//! Command implementations behind the `squeezelab` binary. Each command
//! writes its manifest first, then its result files, then rewrites the
//! manifest with the list of outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::jsa::{
    apply_filter, hom_curve, k_abs, marginal_spectra, max_unaliased_delay, overlap_integral, schmidt_decompose,
    JointSpectralAmplitude, Spectrum,
};
use crate::montecarlo::{
    correlation_g2, g2_from_tes, photon_number_histogram, read_tes_csv, simulate_correlation_run, simulate_hom_run,
    simulate_tag_run, simulate_tes_run, write_tes_csv, CorrelationKind, HomRun, Spectrometer, TesInput,
};
use crate::photon::{log_range, mean_photons_to_squeezing_db, theory_curves};
use crate::report::{column, read_table, write_json, write_table, ExperimentManifest};
use crate::stats::bootstrap_kabs;
use crate::tags::{count_summary, demux_polarization, hom_analysis, joint_spectrum, singles_spectrum, TagStream};
use crate::tof::{fit_dispersion, resolution, DetectorModel, DispersionModel};
use crate::units::{omega_to_wavelength, NM};

pub const TAGS_FILE: &str = "tags.bin";
pub const TES_FILE: &str = "tes.csv";
pub const HOM_FILE: &str = "hom_run.json";
pub const SPECTROMETER_FILE: &str = "spectrometer.json";

/// What `simulate` produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationKind {
    Tof,
    Hom,
    Correlation,
    Tes,
}

/// What `analyze` computes from a run directory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    Joint,
    Hom,
    G2,
    Singles,
}

/// Loaded configuration plus the bytes it came from, for hashing.
struct Loaded {
    cfg: ExperimentConfig,
    bytes: Vec<u8>,
    path: Option<PathBuf>,
}

fn load(config: Option<&Path>) -> Result<Loaded> {
    match config {
        Some(p) => Ok(Loaded {
            cfg: ExperimentConfig::from_path(p)?,
            bytes: std::fs::read(p).map_err(|e| Error::io(p, e))?,
            path: Some(p.to_path_buf()),
        }),
        None => Ok(Loaded {
            cfg: ExperimentConfig::default(),
            bytes: Vec::new(),
            path: None,
        }),
    }
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn params<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| Error::Numeric(e.to_string()))
}

/// Writes the manifest and returns it for the final update.
fn start(
    command: &str,
    loaded: Option<&Loaded>,
    parameters: serde_json::Value,
    seed: Option<u64>,
    extra_inputs: &[&[u8]],
    out: &Path,
) -> Result<ExperimentManifest> {
    prepare(out)?;
    let mut inputs: Vec<&[u8]> = Vec::new();
    if let Some(l) = loaded {
        inputs.push(&l.bytes);
    }
    inputs.extend_from_slice(extra_inputs);
    let m = ExperimentManifest::new(
        command,
        loaded.and_then(|l| l.path.as_deref()),
        parameters,
        seed,
        &inputs,
        out,
    );
    m.write()?;
    Ok(m)
}

fn finish(mut m: ExperimentManifest, outputs: &[&str], counts: BTreeMap<String, u64>) -> Result<()> {
    m.outputs = outputs.iter().map(|s| s.to_string()).collect();
    m.counts = counts;
    m.write()
}

fn nm(omega: f64) -> f64 {
    omega_to_wavelength(omega) / NM
}

fn jsa_rows(jsa: &JointSpectralAmplitude) -> Vec<Vec<f64>> {
    let g = jsa.grid();
    let a = jsa.amplitude();
    let mut rows = Vec::with_capacity(g.n_s() * g.n_i());
    for j in 0..g.n_s() {
        for k in 0..g.n_i() {
            let z = a[(j, k)];
            rows.push(vec![nm(g.signal_omega(j)), nm(g.idler_omega(k)), z.norm(), z.arg()]);
        }
    }
    rows
}

fn spectrum_summary(s: &Spectrum) -> serde_json::Value {
    json!({
        "centroid_nm": s.centroid_wavelength() / NM,
        "fwhm_nm": s.fwhm_wavelength() / NM,
    })
}

/// JSA matrix, Schmidt table, marginals, single-pair HOM curve and a
/// K/K_ABS report for the configured source.
pub fn cmd_jsa(config: Option<&Path>, out: &Path) -> Result<()> {
    let loaded = load(config)?;
    let cfg = &loaded.cfg;
    let m = start("jsa", Some(&loaded), params(cfg)?, None, &[], out)?;
    let jsa = cfg.jsa()?;
    let d = schmidt_decompose(&jsa)?;
    let k = d.effective_mode_number()?;
    let kabs = k_abs(&jsa)?;
    let grid = jsa.grid().clone();

    write_table(
        &out.join("jsa.csv"),
        &[
            "signal_wavelength_nm",
            "idler_wavelength_nm",
            "abs_amplitude",
            "phase_rad",
        ],
        &jsa_rows(&jsa),
    )?;
    let mut outputs = vec!["jsa.csv"];

    let (sig, idl) = marginal_spectra(&grid, &jsa.joint_intensity())?;
    let mut report = json!({
        "grid_points": grid.n_s(),
        "k": k,
        "k_abs": kabs,
        "marginals": {
            "signal": spectrum_summary(&sig),
            "idler": spectrum_summary(&idl),
            "overlap": overlap_integral(&sig, &idl)?,
        },
    });

    let mut schmidt_rows: Vec<Vec<f64>> = d
        .weights()
        .iter()
        .enumerate()
        .take(d.modes_for_tail(1e-6).max(1))
        .map(|(n, w)| vec![n as f64, *w])
        .collect();
    let mut schmidt_headers = vec!["mode", "weight"];
    let mut marginal_rows: Vec<Vec<f64>> = (0..grid.n_s())
        .map(|j| vec![nm(sig.omega(j)), sig.values[j], nm(idl.omega(j)), idl.values[j]])
        .collect();
    let mut marginal_headers = vec![
        "signal_wavelength_nm",
        "signal_density",
        "idler_wavelength_nm",
        "idler_density",
    ];

    let hom_source = if let Some(f) = &cfg.filter {
        let (filtered, tr) = apply_filter(&jsa, f, f)?;
        let df = schmidt_decompose(&filtered)?;
        write_table(
            &out.join("jsa_filtered.csv"),
            &[
                "signal_wavelength_nm",
                "idler_wavelength_nm",
                "abs_amplitude",
                "phase_rad",
            ],
            &jsa_rows(&filtered),
        )?;
        outputs.push("jsa_filtered.csv");
        for (n, row) in schmidt_rows.iter_mut().enumerate() {
            row.push(tr.signal.get(n).copied().unwrap_or(f64::NAN));
            row.push(tr.idler.get(n).copied().unwrap_or(f64::NAN));
        }
        schmidt_headers.extend(["signal_transmission", "idler_transmission"]);
        let (fs, fi) = marginal_spectra(&grid, &filtered.joint_intensity())?;
        for (j, row) in marginal_rows.iter_mut().enumerate() {
            row.push(fs.values[j]);
            row.push(fi.values[j]);
        }
        marginal_headers.extend(["filtered_signal_density", "filtered_idler_density"]);
        report["filtered"] = json!({
            "k": df.effective_mode_number()?,
            "k_abs": k_abs(&filtered)?,
            "main_mode_transmission": [tr.main_signal(), tr.main_idler()],
            "higher_mode_transmission": [tr.higher_order_signal(), tr.higher_order_idler()],
            "marginals": {
                "signal": spectrum_summary(&fs),
                "idler": spectrum_summary(&fi),
                "overlap": overlap_integral(&fs, &fi)?,
            },
        });
        filtered
    } else {
        jsa.clone()
    };
    write_table(&out.join("schmidt.csv"), &schmidt_headers, &schmidt_rows)?;
    write_table(&out.join("marginals.csv"), &marginal_headers, &marginal_rows)?;
    outputs.extend(["schmidt.csv", "marginals.csv"]);

    let limit_ps = max_unaliased_delay(hom_source.grid()) * 1e12;
    if cfg.run.hom_delay_span_ps > limit_ps {
        return Err(Error::config(
            "run.hom_delay_span",
            format!("exceeds the {limit_ps:.2} ps alias-free limit of this grid; raise grid.points"),
        ));
    }
    let delays: Vec<f64> = cfg.hom_delays_ps().iter().map(|t| t * 1e-12).collect();
    let curve = hom_curve(&hom_source, &delays)?;
    let rows: Vec<Vec<f64>> = curve
        .delays
        .iter()
        .zip(&curve.coincidence)
        .map(|(t, p)| vec![t * 1e12, *p])
        .collect();
    write_table(
        &out.join("hom_theory.csv"),
        &["delay_ps", "coincidence_probability"],
        &rows,
    )?;
    outputs.push("hom_theory.csv");
    report["hom"] = json!({
        "visibility": curve.visibility()?,
        "dip_delay_ps": curve.delays[curve.min_index()] * 1e12,
    });
    write_json(&out.join("report.json"), &report)?;
    outputs.push("report.json");
    finish(m, &outputs, BTreeMap::new())
}

/// Fits a cubic dispersion model to (wavelength, delay) calibration points.
pub fn cmd_calibrate(points: &Path, out: &Path) -> Result<()> {
    let bytes = std::fs::read(points).map_err(|e| Error::io(points, e))?;
    let (headers, rows) = read_table(points)?;
    let (cl, ct) = (
        column(points, &headers, "wavelength_nm")?,
        column(points, &headers, "delay_ps")?,
    );
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[cl], r[ct])).collect();
    let m = start("calibrate", None, json!({ "points": points }), None, &[&bytes], out)?;
    let model = fit_dispersion(&pts)?;
    std::fs::write(out.join("dispersion.txt"), model.to_key_value()).map_err(|e| Error::io(out, e))?;
    let residuals: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(l, t)| {
            let f = model.wavelength_to_delay(l)?;
            Ok(vec![l, t, f, t - f])
        })
        .collect::<Result<_>>()?;
    write_table(
        &out.join("residuals.csv"),
        &["wavelength_nm", "delay_ps", "fitted_delay_ps", "residual_ps"],
        &residuals,
    )?;
    let center = 0.5 * (model.range_nm.0 + model.range_nm.1);
    let probe = if model.contains(1570.0) { 1570.0 } else { center };
    write_json(
        &out.join("report.json"),
        &json!({
            "model": model,
            "zero_dispersion_ci95_nm": model.zero_dispersion_ci95_nm(),
            "probe_wavelength_nm": probe,
            "dispersion_ps_per_nm": model.local_dispersion(probe),
            "snspd_resolution_nm": resolution(&model, &DetectorModel::snspd(), probe)?,
        }),
    )?;
    let counts = BTreeMap::from([("points".to_string(), pts.len() as u64)]);
    finish(m, &["dispersion.txt", "residuals.csv", "report.json"], counts)
}

fn resolve_seed(cli: Option<u64>, cfg: &ExperimentConfig) -> Result<u64> {
    cli.or(cfg.run.seed)
        .ok_or_else(|| Error::config("run.seed", "no seed given; pass --seed or set run.seed"))
}

/// Optional overrides of the configured run kind.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimulateOptions {
    pub correlation: Option<CorrelationKind>,
    pub tes_input: Option<TesInput>,
    pub pulses: Option<u64>,
}

/// Synthetic run written to `out`: a tag stream (tof, correlation), TES
/// records (tes) or HOM scan counts (hom).
pub fn cmd_simulate(
    kind: SimulationKind,
    config: Option<&Path>,
    seed: Option<u64>,
    opts: SimulateOptions,
    out: &Path,
) -> Result<()> {
    let mut loaded = load(config)?;
    if let Some(n) = opts.pulses {
        if n == 0 {
            return Err(Error::config("run.pulses", "must be positive"));
        }
        loaded.cfg.run.pulses = n;
    }
    if let Some(c) = opts.correlation {
        loaded.cfg.run.correlation = c;
    }
    if let Some(t) = opts.tes_input {
        loaded.cfg.run.tes_input = t;
    }
    let seed = resolve_seed(seed, &loaded.cfg)?;
    let cfg = &loaded.cfg;
    let run_cfg = cfg.run_config(seed)?;
    let m = start(
        "simulate",
        Some(&loaded),
        json!({ "kind": kind, "config": params(cfg)? }),
        Some(seed),
        &[],
        out,
    )?;
    let mut counts = BTreeMap::from([("pulses".to_string(), run_cfg.n_pulses)]);
    let outputs: Vec<&str> = match kind {
        SimulationKind::Tof | SimulationKind::Correlation => {
            let stream = if kind == SimulationKind::Tof {
                simulate_tag_run(&run_cfg)?
            } else {
                simulate_correlation_run(&run_cfg, cfg.run.correlation)?
            };
            stream.write_binary(&out.join(TAGS_FILE))?;
            write_json(&out.join(SPECTROMETER_FILE), &cfg.spectrometer)?;
            counts.insert("tags".into(), stream.records.len() as u64);
            for (ch, name) in stream.header.channel_names.iter().enumerate() {
                counts.insert(format!("tags_{name}"), stream.count_channel(ch as u16) as u64);
            }
            vec![TAGS_FILE, SPECTROMETER_FILE]
        }
        SimulationKind::Hom => {
            let run = simulate_hom_run(&run_cfg)?;
            write_json(&out.join(HOM_FILE), &run)?;
            let rows: Vec<Vec<f64>> = run
                .points
                .iter()
                .map(|p| {
                    vec![
                        p.delay_ps,
                        p.pulses as f64,
                        p.coincidences as f64,
                        p.singles[0] as f64,
                        p.singles[1] as f64,
                    ]
                })
                .collect();
            write_table(
                &out.join("hom_scan.csv"),
                &["delay_ps", "pulses", "coincidences", "singles_c", "singles_d"],
                &rows,
            )?;
            counts.insert("coincidences".into(), run.points.iter().map(|p| p.coincidences).sum());
            counts.insert("multi_pair_pulses".into(), run.multi_pair_pulses);
            counts.insert("truncated_pulses".into(), run.truncated_pulses);
            vec![HOM_FILE, "hom_scan.csv"]
        }
        SimulationKind::Tes => {
            let recs = simulate_tes_run(&run_cfg, cfg.run.tes_input)?;
            write_tes_csv(&recs, &out.join(TES_FILE))?;
            counts.insert("photons_c".into(), recs.iter().map(|r| r.n_c as u64).sum());
            counts.insert("photons_d".into(), recs.iter().map(|r| r.n_d as u64).sum());
            vec![TES_FILE]
        }
    };
    finish(m, &outputs, counts)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Analysis of a run directory produced by `simulate`. Histogram settings
/// come from `config`, or from the config recorded in the run's manifest.
pub fn cmd_analyze(
    run: &Path,
    mode: AnalysisMode,
    config: Option<&Path>,
    seed: Option<u64>,
    resamples: Option<usize>,
    out: &Path,
) -> Result<()> {
    if out
        .canonicalize()
        .ok()
        .is_some_and(|o| run.canonicalize().ok() == Some(o))
    {
        return Err(Error::InvalidArgument(
            "--out must differ from the run directory".into(),
        ));
    }
    let run_manifest = ExperimentManifest::read(run)?;
    let config = config.map(Path::to_path_buf).or(run_manifest.config_file.clone());
    let loaded = load(config.as_deref())?;
    let cfg = &loaded.cfg;
    let resamples = resamples.unwrap_or(cfg.analysis.resamples);
    if resamples < 2 {
        return Err(Error::config("analysis.resamples", "need at least 2 resamples"));
    }
    let seed = seed.or(run_manifest.seed).unwrap_or(0);

    let input_names: &[&str] = match mode {
        AnalysisMode::Joint | AnalysisMode::Singles => &[TAGS_FILE, SPECTROMETER_FILE],
        AnalysisMode::Hom => &[HOM_FILE],
        AnalysisMode::G2 if run.join(TES_FILE).exists() => &[TES_FILE],
        AnalysisMode::G2 => &[TAGS_FILE],
    };
    let inputs = input_names
        .iter()
        .map(|n| read_file(&run.join(n)))
        .collect::<Result<Vec<_>>>()?;
    let input_refs: Vec<&[u8]> = inputs.iter().map(Vec::as_slice).collect();
    let m = start(
        "analyze",
        Some(&loaded),
        json!({ "mode": mode, "run": run, "resamples": resamples, "analysis": cfg.analysis }),
        Some(seed),
        &input_refs,
        out,
    )?;
    let mut counts = BTreeMap::new();

    let outputs: Vec<&str> = match mode {
        AnalysisMode::Joint | AnalysisMode::Singles => {
            let stream = TagStream::read_binary(&run.join(TAGS_FILE))?;
            let sp_path = run.join(SPECTROMETER_FILE);
            let sp: Spectrometer =
                serde_json::from_slice(&inputs[1]).map_err(|e| Error::format(&sp_path, e.to_string()))?;
            let demux = demux_polarization(&stream, &sp.demux_config(0, stream.header.clock_period_ps))?;
            let (ms, mi) = sp.maps();
            let bins = cfg.analysis.bins()?;
            counts.insert("signal_tags".into(), demux.signal.len() as u64);
            counts.insert("idler_tags".into(), demux.idler.len() as u64);
            if mode == AnalysisMode::Joint {
                let js = joint_spectrum(&demux.signal, &demux.idler, (&ms, &mi), (&bins, &bins))?;
                let h = &js.histogram;
                let centers = bins.centers();
                let mut rows = Vec::new();
                for (j, ls) in centers.iter().enumerate() {
                    for (k, li) in centers.iter().enumerate() {
                        rows.push(vec![*ls, *li, h.counts[(j, k)] as f64]);
                    }
                }
                write_table(
                    &out.join("joint_counts.csv"),
                    &["signal_wavelength_nm", "idler_wavelength_nm", "counts"],
                    &rows,
                )?;
                let bs = bootstrap_kabs(h, resamples, seed)?;
                let summary = count_summary(&demux.signal, &demux.idler, None)?;
                counts.insert("binned_pairs".into(), h.total());
                write_json(
                    &out.join("summary.json"),
                    &json!({
                        "k_abs": bs.estimate,
                        "bootstrap": bs,
                        "ci95_basic": [bs.basic.0, bs.basic.1],
                        "coincident_pulses": js.coincident_pulses,
                        "multi_tag_pulses": js.multi_tag_pulses,
                        "unbinned_pairs": js.unbinned_pairs,
                        "rates": summary,
                    }),
                )?;
                vec!["joint_counts.csv", "summary.json"]
            } else {
                let s = singles_spectrum(&demux.signal.tags, &ms, &bins);
                let i = singles_spectrum(&demux.idler.tags, &mi, &bins);
                let rows: Vec<Vec<f64>> = bins
                    .centers()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| vec![*c, s.counts[j] as f64, i.counts[j] as f64])
                    .collect();
                write_table(
                    &out.join("singles.csv"),
                    &["wavelength_nm", "signal_counts", "idler_counts"],
                    &rows,
                )?;
                let describe = |x: &crate::tags::SinglesSpectrum| {
                    json!({
                        "binned": x.binned(),
                        "alias": x.alias,
                        "unphysical": x.unphysical,
                        "outside_bins": x.outside_bins,
                        "mean_nm": x.mean_nm(),
                        "std_nm": x.std_nm(),
                        "gaussian_fwhm_nm": x.gaussian_fwhm_nm(),
                        "peak_nm": x.peak_nm(),
                    })
                };
                write_json(
                    &out.join("summary.json"),
                    &json!({ "signal": describe(&s), "idler": describe(&i) }),
                )?;
                vec!["singles.csv", "summary.json"]
            }
        }
        AnalysisMode::Hom => {
            let path = run.join(HOM_FILE);
            let hr: HomRun = serde_json::from_slice(&inputs[0]).map_err(|e| Error::format(&path, e.to_string()))?;
            let a = hom_analysis(&hr.scan(), &hr.background_run(), &hr.singles_rates())?;
            let rows: Vec<Vec<f64>> = hr
                .points
                .iter()
                .zip(&a.corrected_rates)
                .map(|(p, r)| vec![p.delay_ps, p.coincidences as f64, p.pulses as f64, *r])
                .collect();
            write_table(
                &out.join("hom_curve.csv"),
                &["delay_ps", "coincidences", "pulses", "corrected_coincidences_per_pulse"],
                &rows,
            )?;
            write_json(
                &out.join("summary.json"),
                &json!({
                    "raw": a.raw,
                    "background_subtracted": a.background_subtracted,
                    "accidental_corrected": a.accidental_corrected,
                    "dip_delay_ps": a.dip_delay_ps,
                    "multi_pair_ratio": hr.multi_pair_ratio(),
                    "singles": hr.singles_rates(),
                }),
            )?;
            counts.insert("scan_points".into(), hr.points.len() as u64);
            vec!["hom_curve.csv", "summary.json"]
        }
        AnalysisMode::G2 if input_names[0] == TES_FILE => {
            let recs = read_tes_csv(&run.join(TES_FILE))?;
            let hc = photon_number_histogram(&recs, 0);
            let hd = photon_number_histogram(&recs, 1);
            let rows: Vec<Vec<f64>> = (0..hc.len().max(hd.len()))
                .map(|n| {
                    vec![
                        n as f64,
                        hc.get(n).copied().unwrap_or(0) as f64,
                        hd.get(n).copied().unwrap_or(0) as f64,
                    ]
                })
                .collect();
            write_table(
                &out.join("photon_numbers.csv"),
                &["photon_number", "pulses_c", "pulses_d"],
                &rows,
            )?;
            write_json(
                &out.join("summary.json"),
                &json!({ "estimator": "photon_number", "g2_c": g2_from_tes(&hc)?, "g2_d": g2_from_tes(&hd)? }),
            )?;
            counts.insert("pulses".into(), recs.len() as u64);
            vec!["photon_numbers.csv", "summary.json"]
        }
        AnalysisMode::G2 => {
            let stream = TagStream::read_binary(&run.join(TAGS_FILE))?;
            let g = correlation_g2(&stream, cfg.analysis.side_peaks)?;
            let n = cfg.analysis.side_peaks as i64;
            let mut rows = Vec::new();
            let mut side = g.side_areas.iter();
            for p in -n..=n {
                let area = if p == 0 {
                    g.central_area
                } else {
                    *side.next().unwrap_or(&0)
                };
                rows.push(vec![p as f64, p as f64 * stream.header.clock_period_ps, area as f64]);
            }
            write_table(&out.join("g2_peaks.csv"), &["peak", "delay_ps", "coincidences"], &rows)?;
            write_json(
                &out.join("summary.json"),
                &json!({ "estimator": "peak_ratio", "g2": g }),
            )?;
            counts.insert("central_area".into(), g.central_area);
            vec!["g2_peaks.csv", "summary.json"]
        }
    };
    finish(m, &outputs, counts)
}

/// Single-mode g² predictions and squeezing over a geometric ⟨n⟩ range.
pub fn cmd_theory(min: f64, max: f64, points: usize, out: &Path) -> Result<()> {
    if !(min > 0.0 && max >= min) || points == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < min <= max and points > 0, got {min}, {max}, {points}"
        )));
    }
    let m = start(
        "theory",
        None,
        json!({ "min": min, "max": max, "points": points }),
        None,
        &[],
        out,
    )?;
    let curves = theory_curves(&log_range(min, max, points))?;
    let rows = curves
        .iter()
        .map(|c| {
            Ok(vec![
                c.mean_photons,
                c.g2_hv,
                c.g2_hh,
                c.g2_cc,
                mean_photons_to_squeezing_db(c.mean_photons)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    write_table(
        &out.join("theory.csv"),
        &["mean_photons", "g2_cross", "g2_marginal", "g2_smsv", "squeezing_db"],
        &rows,
    )?;
    finish(m, &["theory.csv"], BTreeMap::new())
}

/// Loads a dispersion model file written by `calibrate`.
pub fn read_dispersion(path: &Path) -> Result<DispersionModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DispersionModel::from_key_value(&text)
}
