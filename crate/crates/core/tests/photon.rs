//! Photon-number statistics against statrs distributions and closed forms.

use statrs::distribution::{Binomial, Discrete, Geometric, Poisson};
use statrs::function::gamma::ln_gamma;

use squeezelab::photon::*;

#[test]
fn thermal_is_geometric() {
    for mu in [0.05, 0.5, 3.0] {
        let d = PhotonNumberDistribution::thermal(mu, 40).unwrap();
        // statrs counts trials from 1.
        let geo = Geometric::new(1.0 / (1.0 + mu)).unwrap();
        for (n, p) in d.probs().iter().enumerate() {
            assert!((p - geo.pmf(n as u64 + 1)).abs() < 1e-14);
        }
    }
}

#[test]
fn poisson_matches_statrs() {
    let d = PhotonNumberDistribution::poisson(1.7, 30).unwrap();
    let p = Poisson::new(1.7).unwrap();
    for (n, x) in d.probs().iter().enumerate() {
        assert!((x - p.pmf(n as u64)).abs() < 1e-14);
    }
    assert!((g2_from_pn(&d).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn smsv_matches_log_gamma_form() {
    let mu = 0.4;
    let d = smsv_pn(mu, 40).unwrap();
    let r = mu.sqrt().asinh();
    for m in 0..=20usize {
        let ln = ln_gamma(2.0 * m as f64 + 1.0) - 2.0 * m as f64 * 2f64.ln() - 2.0 * ln_gamma(m as f64 + 1.0);
        let want = ln.exp() * r.tanh().powi(2 * m as i32) / r.cosh();
        assert!((d.probs()[2 * m] - want).abs() < 1e-14);
        if 2 * m < 40 {
            assert_eq!(d.probs()[2 * m + 1], 0.0);
        }
    }
    assert!((d.mean() - mu).abs() < 1e-9);
}

#[test]
fn beam_splitter_turns_tmsv_into_smsv() {
    let mu = 0.3;
    let joint = tmsv_joint_pn(&SqueezerSpec::single_mode(mu), 60).unwrap();
    let (c, d) = beamsplitter_mix(&joint).unwrap();
    let want = smsv_pn(mu, 60).unwrap();
    for n in 0..=40 {
        assert!((c.probs()[n] - want.probs()[n]).abs() < 1e-12, "n={n}");
        assert!((d.probs()[n] - want.probs()[n]).abs() < 1e-12);
    }
}

#[test]
fn binomial_loss_on_fock_state() {
    let eta = 0.37;
    let out = apply_binomial_loss(&PhotonNumberDistribution::fock(6), eta).unwrap();
    let b = Binomial::new(eta, 6).unwrap();
    for k in 0..=6 {
        assert!((out.probs()[k] - b.pmf(k as u64)).abs() < 1e-14);
    }
}

#[test]
fn fock_state_g2() {
    for n in 2..6 {
        let g = g2_from_pn(&PhotonNumberDistribution::fock(n)).unwrap();
        assert!((g - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
    }
}

#[test]
fn equal_weight_modes() {
    // K equal modes: marginal g² = 1 + 1/K, cross g² = 1 + 1/K + 1/⟨n⟩.
    let mu = 0.2;
    for k in [1usize, 2, 4] {
        let spec = SqueezerSpec::multimode(mu, vec![1.0 / k as f64; k]);
        let joint = multimode_joint_pn(&spec, nmax_for_tail(mu, 1e-16) + 40).unwrap();
        let kf = k as f64;
        let gm = g2_from_pn(&joint.signal_marginal()).unwrap();
        assert!((gm - (1.0 + 1.0 / kf)).abs() < 1e-9, "K={k}: {gm}");
        let gc = g2_cross(&joint).unwrap();
        assert!((gc - (1.0 + 1.0 / kf + 1.0 / mu)).abs() < 1e-8, "K={k}: {gc}");
    }
}

#[test]
fn squeezing_conversion() {
    // sinh²r = ⟨n⟩ and dB = 20 r log10(e).
    let db = mean_photons_to_squeezing_db(1.0).unwrap();
    assert!((db - 20.0 * 1f64.asinh() * std::f64::consts::LOG10_E).abs() < 1e-12);
    assert_eq!(mean_photons_to_squeezing_db(0.0).unwrap(), 0.0);
}

#[test]
fn theory_curves_closed_forms() {
    let c = theory_curves(&[0.25, 1.0]).unwrap();
    assert_eq!((c[0].g2_hv, c[0].g2_hh, c[0].g2_cc), (6.0, 2.0, 7.0));
    assert_eq!((c[1].g2_hv, c[1].g2_hh, c[1].g2_cc), (3.0, 2.0, 4.0));
    assert!(theory_curves(&[0.0]).is_err());
}
