use num_complex::Complex64;
use su11sim::detection::effective_time;
use su11sim::interferometer::InterferometerConfig;
use su11sim::sensitivity::{
    loglog_fit, min_detectable_phase, sensitivity_sweep, theoretical_min_phase, SweepSettings,
};

fn seeds() -> Vec<u64> {
    (0..30).collect()
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn doubling_photons_shrinks_mzi_threshold_by_root_two() {
    let s = SweepSettings::default();
    let pts = sensitivity_sweep(&InterferometerConfig::mzi(one(), true), &[1e8, 2e8], &s, &seeds()).unwrap();
    let ratio = pts[0].delta_phi_min / pts[1].delta_phi_min;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn threshold_is_monotone_in_gain_and_photons() {
    let s = SweepSettings::default();
    let flux = 1e8 / effective_time(s.rbw);
    let mut last = f64::INFINITY;
    for g in [1.5, 2.0, 3.0, 5.0] {
        let cfg = InterferometerConfig::sui(g, g, one()).with_phase_arm_coherent(flux).unwrap();
        let p = min_detectable_phase(&cfg, &s, &seeds()).unwrap();
        assert!(p.delta_phi_min <= last + p.uncertainty, "G={g}");
        let bound = theoretical_min_phase(g, 2.0 * p.i_ps).unwrap();
        assert!((p.delta_phi_min / bound - 1.0).abs() < 0.1, "G={g}: {} vs {bound}", p.delta_phi_min);
        last = p.delta_phi_min;
    }
    let pts = sensitivity_sweep(&InterferometerConfig::sui(3.0, 3.0, one()), &[1e7, 1e8, 1e9], &s, &seeds()).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].delta_phi_min <= w[0].delta_phi_min + w[0].uncertainty);
    }
    let fit = loglog_fit(&pts).unwrap();
    assert!((fit.slope + 0.5).abs() < 0.05, "{fit:?}");
}

#[test]
fn near_unit_gain_sui_limits_to_the_mzi_over_root_two() {
    let s = SweepSettings::default();
    let flux = 1e8 / effective_time(s.rbw);
    let sui = InterferometerConfig::sui(1.01, 1.01, one()).with_phase_arm_coherent(flux).unwrap();
    let mzi = InterferometerConfig::mzi(one(), true).with_phase_arm_coherent(flux).unwrap();
    let a = min_detectable_phase(&sui, &s, &seeds()).unwrap();
    let b = min_detectable_phase(&mzi, &s, &seeds()).unwrap();
    let offset_db = 10.0 * (b.delta_phi_min / a.delta_phi_min).log10();
    // √(2G) at G = 1.01 in the 10·log10 convention
    let expected = 10.0 * (2.0f64 * 1.01).sqrt().log10();
    assert!((offset_db - expected).abs() < 0.3, "{offset_db} vs {expected}");
    assert!(sensitivity_sweep(&InterferometerConfig::sui(1.0, 1.0, one()), &[1e8], &s, &seeds()).is_err());
}
