use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use su11sim::interferometer::{
    build_state, mzi_fringe_intensity, phase_grid, phase_sensing_intensity, sui_fringe_intensity,
    InterferometerConfig, PHASE_MODE,
};

fn close(engine: f64, analytic: f64) -> bool {
    (engine - analytic).abs() <= 1e-9 * analytic.abs().max(1.0)
}

#[test]
fn sui_engine_matches_analytic_fringe_on_grid() {
    for g in [1.0, 2.0, 3.0, 4.0, 5.0] {
        for alpha in [0.0, 1.5, 3.0] {
            let cfg = InterferometerConfig::sui(g, g, Complex64::new(alpha, 0.0));
            for phi in phase_grid(32) {
                let n = build_state(&cfg, phi).unwrap().mean_photon_number(PHASE_MODE).unwrap();
                let a = sui_fringe_intensity(g, g, alpha * alpha, phi).unwrap();
                assert!(close(n, a), "G={g} α={alpha} φ={phi}: {n} vs {a}");
            }
        }
    }
}

#[test]
fn mzi_engine_matches_analytic_fringe_on_grid() {
    for alpha in [0.0, 1.5, 3.0] {
        for comp in [false, true] {
            let cfg = InterferometerConfig::mzi(Complex64::new(alpha, 0.0), comp);
            let ips = phase_sensing_intensity(&cfg).unwrap();
            for phi in phase_grid(32) {
                let n = build_state(&cfg, phi).unwrap().mean_photon_number(PHASE_MODE).unwrap();
                let a = mzi_fringe_intensity(ips, phi).unwrap();
                assert!(close(n, a), "α={alpha} φ={phi}: {n} vs {a}");
            }
        }
    }
}

#[test]
fn lossless_dark_fringe_is_shot_noise_limited() {
    for g in [1.5, 3.0, 5.0] {
        let cfg = InterferometerConfig::sui(g, g, Complex64::new(2.0, 0.0));
        let s = build_state(&cfg, PI).unwrap();
        for lo in [0.0, 0.7, PI / 2.0] {
            assert!((s.quadrature_variance(PHASE_MODE, lo).unwrap() - 1.0).abs() < 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn unequal_gains_match_analytic(
        g1 in 1.0..5.0f64,
        g2 in 1.0..5.0f64,
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
        phi in 0.0..(2.0 * PI),
    ) {
        let alpha = Complex64::new(re, im);
        prop_assume!(alpha.norm() <= 3.0);
        let cfg = InterferometerConfig::sui(g1, g2, alpha);
        let n = build_state(&cfg, phi).unwrap().mean_photon_number(PHASE_MODE).unwrap();
        // the seed phase only shifts the fringe through the conjugated seed term
        let a = sui_fringe_intensity(g1, g2, alpha.norm_sqr(), phi).unwrap();
        prop_assert!(close(n, a), "{} vs {}", n, a);
    }

    #[test]
    fn outputs_stay_physical_with_loss(
        g1 in 1.0..5.0f64,
        g2 in 1.0..5.0f64,
        eta_i in 0.0..=1.0f64,
        eta_d in 0.0..=1.0f64,
        phi in 0.0..(2.0 * PI),
    ) {
        let cfg = InterferometerConfig::sui(g1, g2, Complex64::new(1.0, 0.0)).with_losses(eta_i, eta_d);
        prop_assert!(build_state(&cfg, phi).unwrap().is_physical());
        let mzi = InterferometerConfig::mzi(Complex64::new(1.0, 0.0), true).with_losses(eta_i, eta_d);
        prop_assert!(build_state(&mzi, phi).unwrap().is_physical());
    }
}
