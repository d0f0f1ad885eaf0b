//! Property tests for the structural invariants of every module.

use nalgebra::DMatrix;
use proptest::prelude::*;

use squeezelab::jsa::*;
use squeezelab::photon::*;
use squeezelab::stats::{bootstrap_kabs, propagate_poisson};
use squeezelab::tags::*;
use squeezelab::tof::*;
use squeezelab::units::NM;

fn source() -> impl Strategy<Value = (SourceConfig, usize)> {
    (
        0.5e-3..10e-3f64,
        1e-9..10e-9f64,
        1.70..1.85f64,
        1.70..1.85f64,
        1.70..1.85f64,
        -3e-9..3e-9f64,
        -1e-25..1e-25f64,
        24usize..48,
    )
        .prop_map(|(l, bw, np, ns, ni, off, chirp, n)| {
            (
                SourceConfig {
                    crystal_length: l,
                    pump_fwhm_bandwidth: bw,
                    group_index_pump: np,
                    group_index_signal: ns,
                    group_index_idler: ni,
                    signal_center_offset: off,
                    pump_chirp: chirp,
                    ..SourceConfig::default()
                },
                n,
            )
        })
}

fn quadrature_inner(a: &[Complex64], b: &[Complex64], d: f64) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jsa_and_schmidt_structure((cfg, n) in source()) {
        let grid = cfg.default_grid(n).unwrap();
        let jsa = build_jsa(&cfg, &grid).unwrap();
        prop_assert!((jsa.norm_sq() - 1.0).abs() < 1e-9);
        prop_assert!(jsa.amplitude().iter().all(|z| z.re.is_finite() && z.im.is_finite()));

        let d = schmidt_decompose(&jsa).unwrap();
        let w = d.weights();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.windows(2).all(|p| p[0] >= p[1]) && w.iter().all(|x| *x >= 0.0));
        prop_assert!(d.effective_mode_number().unwrap() >= 1.0 - 1e-12);
        prop_assert!(k_abs(&jsa).unwrap() >= 1.0 - 1e-12);
        prop_assert!(d.reconstruct().unwrap().distance(&jsa).unwrap() < 1e-8);

        let m = 3.min(d.rank());
        for a in 0..m {
            for b in 0..m {
                let want = if a == b { 1.0 } else { 0.0 };
                let s = quadrature_inner(&d.signal_mode(a), &d.signal_mode(b), grid.ds());
                let i = quadrature_inner(&d.idler_mode(a), &d.idler_mode(b), grid.di());
                prop_assert!((s.norm() - want).abs() < 1e-8, "signal {a},{b}: {s:?}");
                prop_assert!((i.norm() - want).abs() < 1e-8, "idler {a},{b}: {i:?}");
            }
        }

        let (sig, idl) = marginal_spectra(&grid, &jsa.joint_intensity()).unwrap();
        prop_assert!((sig.values.iter().sum::<f64>() * sig.spacing - 1.0).abs() < 1e-9);
        prop_assert!((idl.values.iter().sum::<f64>() * idl.spacing - 1.0).abs() < 1e-9);

        let (same, tr) = apply_filter(&jsa, &SpectralFilter::all_pass(), &SpectralFilter::all_pass()).unwrap();
        prop_assert!(same.distance(&jsa).unwrap() < 1e-12);
        prop_assert!(tr.signal.iter().chain(&tr.idler).all(|t| (t - 1.0).abs() < 1e-9));

        let limit = 0.999 * max_unaliased_delay(&grid);
        let delays: Vec<f64> = (-4..=4).map(|k| k as f64 * limit / 4.0).collect();
        let curve = hom_curve(&jsa, &delays).unwrap();
        prop_assert!(curve.coincidence.iter().all(|p| (0.0..=0.5 + 1e-9).contains(p)));
    }

    #[test]
    fn hom_curve_is_even_for_symmetric_modulus(
        centers in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64, 0.3..1.5f64), 1..4),
        n in 24usize..40,
    ) {
        let grid = FrequencyGrid::symmetric(n, 1e15 - 5e12, 1e15 + 5e12).unwrap();
        let c = 1e15;
        let f = |s: f64, i: f64| -> f64 {
            centers.iter().map(|(a, b, w)| {
                let (x, y) = ((s - c) / 1e12 - a, (i - c) / 1e12 - b);
                (-(x * x + y * y) / (w * w)).exp()
            }).sum()
        };
        let jsa = JointSpectralAmplitude::from_fn(grid.clone(), |s, i| Complex64::new(f(s, i) + f(i, s), 0.0)).unwrap();
        let limit = 0.999 * max_unaliased_delay(&grid);
        let delays: Vec<f64> = (0..=6).map(|k| k as f64 * limit / 6.0).collect();
        let neg: Vec<f64> = delays.iter().map(|t| -t).collect();
        let p = hom_curve(&jsa, &delays).unwrap().coincidence;
        let q = hom_curve(&jsa, &neg).unwrap().coincidence;
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn filter_transmission_in_unit_interval(
        center in 1500.0..1650.0f64,
        width in 0.5..30.0f64,
        l in 1000.0..2000.0f64,
        table in prop::collection::vec(0.0..1.0f64, 2..8),
    ) {
        for f in [
            SpectralFilter::top_hat(center * NM, width * NM),
            SpectralFilter::gaussian(center * NM, width * NM),
            SpectralFilter::tabulated(
                table.iter().enumerate().map(|(k, t)| ((1500.0 + 20.0 * k as f64) * NM, *t)).collect(),
            ).unwrap(),
        ] {
            let t = f.transmission(l * NM);
            prop_assert!((0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn g2_survives_binomial_loss(
        raw in prop::collection::vec(0.0..1.0f64, 3..12),
        eta in 0.01..1.0f64,
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 0.0 && raw[2..].iter().any(|x| *x > 1e-3));
        let pn = PhotonNumberDistribution::new(raw.iter().map(|x| x / total).collect()).unwrap();
        let lost = apply_binomial_loss(&pn, eta).unwrap();
        prop_assert!(lost.probs().iter().all(|p| *p >= 0.0));
        prop_assert!(lost.total() <= 1.0 + 1e-12);
        let (a, b) = (g2_from_pn(&pn).unwrap(), g2_from_pn(&lost).unwrap());
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn squeezed_distributions_are_proper(mu in 0.01..2.0f64, nmax in 4usize..60) {
        for d in [smsv_pn(mu, nmax).unwrap(), PhotonNumberDistribution::thermal(mu, nmax).unwrap()] {
            prop_assert!(d.probs().iter().all(|p| *p >= 0.0));
            prop_assert!(d.total() <= 1.0 + 1e-12);
            prop_assert!(d.is_truncated() || d.tail() <= 1e-9);
        }
        let j = tmsv_joint_pn(&SqueezerSpec::single_mode(mu), nmax).unwrap();
        prop_assert!(j.probs().iter().all(|p| *p >= 0.0));
        prop_assert!(j.total() <= 1.0 + 1e-12);
    }

    #[test]
    fn beam_splitter_conserves_probability(a in 0usize..8, b in 0usize..8) {
        let p = beamsplitter_probabilities(a, b);
        prop_assert_eq!(p.len(), a + b + 1);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dispersion_round_trip(l in 1101.0..1799.0f64, preset in 0usize..2) {
        let m = if preset == 0 { DispersionModel::signal_path() } else { DispersionModel::idler_path() };
        prop_assume!((l - m.zero_dispersion_nm).abs() > 0.5);
        let branch = if l > m.zero_dispersion_nm { Branch::AboveFold } else { Branch::BelowFold };
        let t = m.wavelength_to_delay(l).unwrap();
        let back = m.delay_to_wavelength(t, branch).unwrap();
        prop_assert!((back - l).abs() < 1e-6);
        // Strictly monotone away from the fold.
        let step = if branch == Branch::AboveFold { 0.1 } else { -0.1 };
        if m.contains(l + step) {
            prop_assert!(m.wavelength_to_delay(l + step).unwrap() > t);
        }
    }

    #[test]
    fn noiseless_cubic_fit(c2 in 0.01..0.2f64, c3 in -2e-5..2e-5f64, c0 in 1e5..1e7f64, l0 in 1250.0..1400.0f64) {
        // Fold at l0: c1 chosen so the derivative vanishes there.
        let r = 1319.0;
        let x0 = l0 - r;
        let c1 = -(2.0 * c2 * x0 + 3.0 * c3 * x0 * x0);
        let truth = [c0, c1, c2, c3];
        let range = (1200.0, 1700.0);
        prop_assume!(DispersionModel::from_coeffs(r, truth, range).is_ok());
        let pts: Vec<(f64, f64)> = (0..=50)
            .map(|k| {
                let l = range.0 + 10.0 * k as f64;
                let x = l - r;
                (l, c0 + c1 * x + c2 * x * x + c3 * x * x * x)
            })
            .collect();
        let fit = fit_dispersion(&pts).unwrap();
        for k in [0, 2] {
            prop_assert!((fit.coeffs[k] - truth[k]).abs() <= 1e-9 * truth[k].abs());
        }
        let scale = c2 * 500.0;
        prop_assert!((fit.coeffs[1] - c1).abs() <= 1e-9 * scale.max(c1.abs()));
        prop_assert!((fit.coeffs[3] - c3).abs() <= 1e-9 * (c2 / 500.0));
        prop_assert!(fit.local_dispersion(fit.zero_dispersion_nm).abs() < 1e-6);
    }

    #[test]
    fn resolution_scaling(j in 10.0..200.0f64, k in 1.5..4.0f64) {
        let m = DispersionModel::signal_path();
        let det = |jitter: f64| DetectorModel { jitter_fwhm_ps: jitter, ..DetectorModel::snspd() };
        let a = resolution(&m, &det(j), 1570.0).unwrap();
        let b = resolution(&m, &det(k * j), 1570.0).unwrap();
        prop_assert!((b / a - k).abs() < 1e-9);
        let ratio = resolution(&m, &det(j), 1620.0).unwrap() / a;
        prop_assert!((ratio - m.local_dispersion(1570.0) / m.local_dispersion(1620.0)).abs() < 1e-9);
    }
}

fn stream_strategy() -> impl Strategy<Value = TagStream> {
    (
        100.0..5000.0f64,
        prop::collection::vec((0u16..2, 0u16..8, 0u64..200, 0.0..1.0f64), 0..200),
    )
        .prop_map(|(period, raw)| {
            let header = StreamHeader::new(period, 200, vec!["a".into(), "b".into()]).unwrap();
            let mut recs: Vec<TagRecord> = raw
                .into_iter()
                .map(|(ch, fl, k, f)| TagRecord {
                    channel: ch,
                    flags: fl,
                    clock_index: k,
                    time_offset_ps: ((header.edge_ps(k + 1) - header.edge_ps(k)) as f64 * f).floor() as u64,
                })
                .collect();
            recs.sort_by_key(|r| (r.clock_index, r.time_offset_ps));
            TagStream::new(header, recs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tag_stream_round_trip(s in stream_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("t.bin");
        s.write_binary(&bin).unwrap();
        prop_assert_eq!(&TagStream::read_binary(&bin).unwrap(), &s);
        let csv = dir.path().join("t.csv");
        s.write_csv(&csv).unwrap();
        // The CSV form carries no flags and no header.
        let back = TagStream::read_csv(&csv, Some(s.header.clone())).unwrap();
        let stripped: Vec<TagRecord> = s.records.iter().map(|r| TagRecord { flags: 0, ..*r }).collect();
        prop_assert_eq!(&back.records, &stripped);
        for r in &s.records {
            prop_assert!((r.time_offset_ps as f64) < s.header.clock_period_ps + 1.0);
        }
    }

    #[test]
    fn demux_conserves_tags(s in stream_strategy(), start in -500.0..0.0f64, width_frac in 0.05..0.45f64) {
        let period = s.header.clock_period_ps;
        let cfg = DemuxConfig {
            channel: 0,
            latency_ps: 0.1 * period,
            idler_delay_ps: 0.5 * period,
            window_start_ps: start.max(-0.05 * period),
            window_width_ps: width_frac * period,
        };
        prop_assume!(cfg.validate(period).is_ok());
        let d = demux_polarization(&s, &cfg).unwrap();
        prop_assert_eq!(d.signal.len() + d.idler.len() + d.discarded + d.other_channels, s.records.len());
    }

    #[test]
    fn singles_and_joint_conservation(
        pulses in prop::collection::vec((prop::option::of(1562.01..1577.99f64), prop::option::of(1562.01..1577.99f64)), 1..300),
        stray in prop::collection::vec((0u64..300, 0.0..3.0e4f64), 0..40),
    ) {
        let sp = squeezelab::montecarlo::Spectrometer::default();
        let (ms, mi) = sp.maps();
        let bins = Bins::centered(1570.0, 8.0, 1.0).unwrap();
        let n = pulses.len() as u64;
        let mut s = PulseTags::empty(n, 1e6);
        let mut i = PulseTags::empty(n, 1e6);
        for (k, (ls, li)) in pulses.iter().enumerate() {
            if let Some(l) = ls {
                s.tags.push(PulseTag { clock_index: k as u64, delay_ps: ms.delay_of(*l).unwrap(), flags: 0 });
            }
            if let Some(l) = li {
                i.tags.push(PulseTag { clock_index: k as u64, delay_ps: mi.delay_of(*l).unwrap(), flags: 0 });
            }
        }
        // Singles histograms conserve every tag, including stray delays.
        let mut with_stray = s.clone();
        for (k, d) in &stray {
            with_stray.tags.push(PulseTag { clock_index: k % n, delay_ps: *d - 1e3, flags: 0 });
        }
        with_stray.tags.sort_by_key(|t| t.clock_index);
        let ss = singles_spectrum(&with_stray.tags, &ms, &bins);
        prop_assert_eq!(ss.total() as usize, with_stray.len());

        // One tag per pulse: joint marginals equal singles of the coincident subsets.
        let j = joint_spectrum(&s, &i, (&ms, &mi), (&bins, &bins)).unwrap();
        let cs = singles_spectrum(&coincident_subset(&s, &i), &ms, &bins);
        let ci = singles_spectrum(&coincident_subset(&i, &s), &mi, &bins);
        prop_assert_eq!(j.histogram.signal_marginal(), cs.counts);
        prop_assert_eq!(j.histogram.idler_marginal(), ci.counts);
        prop_assert_eq!(j.histogram.total() + j.unbinned_pairs, j.coincident_pulses);
    }

    #[test]
    fn g2_is_symmetric_in_start_and_stop(
        a in prop::collection::btree_set(0u64..400, 1..120),
        b in prop::collection::btree_set(0u64..400, 1..120),
    ) {
        let period = 1000.0;
        let start: Vec<u64> = a.iter().map(|k| k * 1000 + 50).collect();
        let stop: Vec<u64> = b.iter().map(|k| k * 1000 + 80).collect();
        let x = g2_peak_ratio(&start, &stop, period, 3, 30.0);
        let y = g2_peak_ratio(&stop, &start, period, 3, -30.0);
        match (x, y) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.central_area, y.central_area);
                prop_assert!((x.g2 - y.g2).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "asymmetric outcome {x:?} / {y:?}"),
        }
    }

    #[test]
    fn hom_corrections_are_linear(
        counts in prop::collection::vec(200u64..2000, 9..15),
        bg in 0u64..100,
        photon in (1e3..1e5f64, 1e3..1e5f64),
        background in (0.0..1e4f64, 0.0..1e4f64),
    ) {
        let pulses = 1_000_000u64;
        let n = counts.len();
        let mut c = counts.clone();
        c[n / 2] /= 4;
        let scan: Vec<HomScanPoint> = c.iter().enumerate()
            .map(|(k, x)| HomScanPoint { delay_ps: k as f64 - (n / 2) as f64, coincidences: *x, pulses })
            .collect();
        let bgr = BackgroundRun { coincidences: bg, pulses };
        let rates = SinglesRates { photon_hz: [photon.0, photon.1], background_hz: [background.0, background.1], period_s: 2.19e-6 };
        if let Ok(a) = hom_analysis(&scan, &bgr, &rates) {
            let acc = rates.accidentals_per_pulse();
            for (p, r) in scan.iter().zip(&a.corrected_rates) {
                let joint = p.coincidences as f64 / pulses as f64 - bg as f64 / pulses as f64 - acc;
                prop_assert!((r - joint).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_propagation_is_exact(counts in prop::collection::vec(0.0..1e4f64, 1..10), w in prop::collection::vec(-3.0..3.0f64, 10)) {
        let est = propagate_poisson(&counts, |c| c.iter().zip(&w).map(|(x, a)| a * x).sum()).unwrap();
        let var: f64 = counts.iter().zip(&w).map(|(c, a)| a * a * c).sum();
        prop_assert!((est.sigma - var.sqrt()).abs() <= 1e-6 * var.sqrt().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bootstrap_interval_structure(cells in prop::collection::vec(0u64..60, 16), seed in 0u64..1000) {
        prop_assume!(cells.iter().sum::<u64>() > 0);
        let bins = Bins::uniform(0.0, 4.0, 4).unwrap();
        let h = Histogram2D::from_counts(bins.clone(), bins, DMatrix::from_row_slice(4, 4, &cells)).unwrap();
        let r = bootstrap_kabs(&h, 200, seed).unwrap();
        prop_assert!(r.sigma >= 0.0);
        prop_assert!(r.percentile.0 <= r.median && r.median <= r.percentile.1);
        prop_assert!(r.basic.0 <= r.basic.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn multimode_marginal_g2_falls_with_mode_number(mu in 0.005..0.05f64) {
        let nmax = nmax_for_tail(mu, 1e-14) + 10;
        let mut last = f64::INFINITY;
        for k in 1usize..=6 {
            let spec = SqueezerSpec::multimode(mu, vec![1.0 / k as f64; k]);
            let g = g2_from_pn(&multimode_joint_pn(&spec, nmax).unwrap().signal_marginal()).unwrap();
            prop_assert!(g < last && g > 1.0);
            prop_assert!((g - (1.0 + 1.0 / k as f64)).abs() <= 0.02 * (1.0 + 1.0 / k as f64));
            last = g;
        }
    }
}
