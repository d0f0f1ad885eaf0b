//! Fiber spectrometer calibration and wavelength mapping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use squeezelab::tof::*;

fn cubic(c: [f64; 4], reference: f64, l: f64) -> f64 {
    let x = l - reference;
    c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

#[test]
fn noiseless_fit_recovers_coefficients() {
    let truth = DispersionModel::signal_path();
    let pts: Vec<(f64, f64)> = grid(1260.0, 1640.0, 10.0)
        .into_iter()
        .map(|l| (l, cubic(truth.coeffs, truth.reference_nm, l)))
        .collect();
    let fit = fit_dispersion(&pts).unwrap();
    assert_eq!(fit.reference_nm, truth.reference_nm);
    for k in [0, 2, 3] {
        let rel = (fit.coeffs[k] - truth.coeffs[k]).abs() / truth.coeffs[k].abs();
        assert!(rel < 1e-9, "c{k}: rel {rel}");
    }
    assert!(fit.coeffs[1].abs() < 1e-9 * truth.coeffs[2] * 100.0);
    assert!((fit.zero_dispersion_nm - 1319.0).abs() < 1e-6);
}

#[test]
fn fold_point_ci_covers_truth() {
    // 2 ps timing noise on a 10 nm calibration grid; the 95 % interval of
    // the fold wavelength should cover 1319 nm about 95 % of the time.
    let truth = DispersionModel::signal_path();
    let noise = Normal::new(0.0, 2.0).unwrap();
    let trials = 200;
    let mut covered = 0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = grid(1260.0, 1640.0, 10.0)
            .into_iter()
            .map(|l| (l, cubic(truth.coeffs, truth.reference_nm, l) + noise.sample(&mut rng)))
            .collect();
        let fit = fit_dispersion(&pts).unwrap();
        if (fit.zero_dispersion_nm - 1319.0).abs() <= fit.zero_dispersion_ci95_nm() {
            covered += 1;
        }
    }
    let rate = covered as f64 / trials as f64;
    assert!((0.88..=0.995).contains(&rate), "coverage {rate}");
}

#[test]
fn presets_match_quoted_dispersion() {
    assert!((DispersionModel::signal_path().local_dispersion(1570.0) - 24.4).abs() < 1e-9);
    assert!((DispersionModel::idler_path().local_dispersion(1570.0) - 23.6).abs() < 1e-9);
    assert!((DispersionModel::signal_path().zero_dispersion_nm - 1319.0).abs() < 1e-6);
}

#[test]
fn snspd_resolution() {
    // FWHM 65 ps → σ = 65/(2√(2 ln 2)) ps, divided by 24.4 ps/nm.
    let want = 65.0 / (2.0 * (2.0 * 2f64.ln()).sqrt()) / 24.4;
    let r = resolution(&DispersionModel::signal_path(), &DetectorModel::snspd(), 1570.0).unwrap();
    assert!((r - want).abs() < 1e-12);
    assert!((r - 1.13).abs() < 0.05);
    assert!(resolution(&DispersionModel::signal_path(), &DetectorModel::snspd(), 1319.0).is_err());
}

#[test]
fn both_branches_invert() {
    let m = DispersionModel::idler_path();
    for l in [1200.0, 1290.0, 1350.0, 1570.0, 1700.0] {
        let t = m.wavelength_to_delay(l).unwrap();
        let branch = if l > m.zero_dispersion_nm {
            Branch::AboveFold
        } else {
            Branch::BelowFold
        };
        let back = m.delay_to_wavelength(t, branch).unwrap();
        assert!((back - l).abs() < 1e-6, "{l} → {back}");
    }
    assert!(m.delay_to_wavelength(m.min_delay() - 1.0, Branch::AboveFold).is_err());
}

#[test]
fn model_file_round_trip() {
    let m = DispersionModel::signal_path();
    let back = DispersionModel::from_key_value(&m.to_key_value()).unwrap();
    assert_eq!(back.coeffs, m.coeffs);
    assert_eq!(back.range_nm, m.range_nm);
    assert!((back.zero_dispersion_nm - m.zero_dispersion_nm).abs() < 1e-9);
}

#[test]
fn standard_fiber_slope() {
    // The slope returned for a target dispersion reproduces it numerically.
    let s = fiber_slope_for(24.4, 1570.0, 1319.0, 1.0);
    let h = 1e-3;
    let d = (fiber_group_delay(1570.0 + h, 1319.0, s, 1.0) - fiber_group_delay(1570.0 - h, 1319.0, s, 1.0)) / (2.0 * h);
    assert!((d - 24.4).abs() < 1e-6);
    // Its derivative vanishes at the zero-dispersion wavelength.
    let d0 =
        (fiber_group_delay(1319.0 + h, 1319.0, s, 1.0) - fiber_group_delay(1319.0 - h, 1319.0, s, 1.0)) / (2.0 * h);
    assert!(d0.abs() < 1e-6);
}
