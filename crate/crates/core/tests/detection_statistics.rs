use std::f64::consts::PI;

use num_complex::Complex64;
use su11sim::detection::{
    effective_time, power_spectrum, simulate_photocurrent, simulate_state_noise, snr_at,
    AcquisitionSettings, ModulationSpec, SignalModel, DEFAULT_MODULATION_FREQUENCY, DEFAULT_RBW,
    DEFAULT_SAMPLE_RATE, DEFAULT_VBW,
};
use su11sim::interferometer::{build_state, InterferometerConfig, PHASE_MODE};
use su11sim::sensitivity::{SweepSettings, ToneProbe};

const BAND: (f64, f64) = (0.6e6, 2.6e6);

fn seeds(n: u64) -> Vec<u64> {
    (1000..1000 + n).collect()
}

fn fitted_losses() -> (f64, f64) {
    let eta = (10f64.powf(0.62) - 1.0) / 8.0;
    (eta / 0.97, 0.97)
}

/// Phase-arm photons per bin that put the MZI threshold between the two
/// smallest modulation depths.
fn arm_photons() -> f64 {
    1.0 / (2.0 * 0.97 * 2.4e-5 * 3.1e-5)
}

fn lossy_pair() -> (InterferometerConfig, InterferometerConfig) {
    let (ei, ed) = fitted_losses();
    let flux = arm_photons() / effective_time(DEFAULT_RBW);
    let sui = InterferometerConfig::sui(5.0, 3.0, Complex64::new(1.0, 0.0))
        .with_losses(ei, ed)
        .with_phase_arm_coherent(flux)
        .unwrap();
    let mzi = InterferometerConfig::mzi(Complex64::new(1.0, 0.0), true)
        .with_losses(ei, ed)
        .with_phase_arm_coherent(flux)
        .unwrap();
    (sui, mzi)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mc_snr(probe: &ToneProbe, depth: f64) -> f64 {
    mean(&probe.ratios(depth).unwrap()) - 1.0
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[test]
fn monte_carlo_snr_matches_closed_form() {
    let settings = SweepSettings::default();
    let (sui, mzi) = lossy_pair();
    for cfg in [&sui, &mzi] {
        let model = SignalModel::locked(cfg, settings.sample_rate).unwrap();
        let probe = ToneProbe::new(&model, &settings, &seeds(100)).unwrap();
        for depth in [2.4e-5, 3.1e-5, 4.7e-5] {
            let mc = mc_snr(&probe, depth);
            let closed = model.predicted_snr(depth, settings.sample_rate, settings.rbw, 0.0);
            assert!((db(mc) - db(closed)).abs() < 0.5, "{:?} δ={depth}: {mc} vs {closed}", cfg.topology);
        }
    }
}

#[test]
fn topology_snr_ratio_follows_gaussian_model() {
    let settings = SweepSettings::default();
    let (sui, mzi) = lossy_pair();
    let ms = SignalModel::locked(&sui, settings.sample_rate).unwrap();
    let mm = SignalModel::locked(&mzi, settings.sample_rate).unwrap();
    let predicted = (ms.slope_per_sample.powi(2) / ms.variance) / (mm.slope_per_sample.powi(2) / mm.variance);
    let ps = ToneProbe::new(&ms, &settings, &seeds(100)).unwrap();
    let pm = ToneProbe::new(&mm, &settings, &seeds(100)).unwrap();
    let depth = 4.7e-5;
    let measured = mc_snr(&ps, depth) / mc_snr(&pm, depth);
    assert!((db(measured) - db(predicted)).abs() < 0.5, "{measured} vs {predicted}");
}

#[test]
fn ideal_sui_gains_ten_log_two_g() {
    let settings = SweepSettings::default();
    let flux = 1e8 / effective_time(settings.rbw);
    for g in [2.0, 5.0] {
        let sui = InterferometerConfig::sui(g, g, Complex64::new(1.0, 0.0))
            .with_phase_arm_coherent(flux)
            .unwrap();
        let mzi = InterferometerConfig::mzi(Complex64::new(1.0, 0.0), true)
            .with_phase_arm_coherent(flux)
            .unwrap();
        let ps = ToneProbe::new(&SignalModel::locked(&sui, settings.sample_rate).unwrap(), &settings, &seeds(100)).unwrap();
        let pm = ToneProbe::new(&SignalModel::locked(&mzi, settings.sample_rate).unwrap(), &settings, &seeds(100)).unwrap();
        let depth = 1e-4;
        let diff = db(mc_snr(&ps, depth)) - db(mc_snr(&pm, depth));
        assert!((diff - db(2.0 * g)).abs() < 0.5, "G={g}: {diff}");
    }
}

#[test]
fn doubling_depth_adds_six_db() {
    let settings = SweepSettings::default();
    let (sui, _) = lossy_pair();
    let model = SignalModel::locked(&sui, settings.sample_rate).unwrap();
    let probe = ToneProbe::new(&model, &settings, &seeds(100)).unwrap();
    // deep enough that the tone dominates its bin
    let depth = 1e-3;
    let peak = |d: f64| mean(&probe.ratios(d).unwrap());
    let step = db(peak(2.0 * depth)) - db(peak(depth));
    assert!((step - 6.02).abs() < 0.3, "{step}");
}

#[test]
fn quiet_record_reads_zero_db() {
    let settings = SweepSettings::default();
    let (sui, mzi) = lossy_pair();
    for cfg in [&sui, &mzi] {
        let model = SignalModel::locked(cfg, settings.sample_rate).unwrap();
        let probe = ToneProbe::new(&model, &settings, &seeds(100)).unwrap();
        let r = mean(&probe.ratios(0.0).unwrap());
        assert!(db(r).abs() < 0.3, "{r}");
    }
}

#[test]
fn largest_depth_is_visible_on_the_mzi() {
    let (_, mzi) = lossy_pair();
    let acq = AcquisitionSettings::default();
    let m = ModulationSpec::new(4.7e-5, DEFAULT_MODULATION_FREQUENCY).unwrap();
    let mut seen = 0;
    for seed in 0..10 {
        let rec = simulate_photocurrent(&mzi, &m, &acq, seed).unwrap();
        let tr = power_spectrum(&rec, DEFAULT_RBW, Some(DEFAULT_VBW)).unwrap();
        if snr_at(&tr, DEFAULT_MODULATION_FREQUENCY, BAND).unwrap().detected() {
            seen += 1;
        }
    }
    assert_eq!(seen, 10);
}

#[test]
fn noise_floors_of_the_amplifier_traces() {
    let (ei, ed) = fitted_losses();
    let acq = AcquisitionSettings {
        duration: 0.1,
        sample_rate: DEFAULT_SAMPLE_RATE,
        electronic_noise: false,
    };
    let vacuum = su11sim::gaussian::GaussianState::vacuum(2).unwrap();
    let pa1 = InterferometerConfig::sui(5.0, 1.0, Complex64::new(0.0, 0.0)).with_losses(ei, ed);
    let pa1_state = build_state(&pa1, PI).unwrap();
    for (state, target) in [(vacuum, 0.0), (pa1_state, 6.2)] {
        let rec = simulate_state_noise(&state, PHASE_MODE, 0.0, &acq, 77).unwrap();
        let tr = power_spectrum(&rec, DEFAULT_RBW, Some(DEFAULT_VBW)).unwrap();
        let (lo, hi) = tr.range_db_in(BAND.0, BAND.1).unwrap();
        assert!(lo > target - 0.2 && hi < target + 0.2, "{target}: [{lo}, {hi}]");
        assert!(hi - lo < 0.5);
    }
}

#[test]
fn electronic_noise_sits_ten_db_below_shot_noise() {
    let acq = AcquisitionSettings {
        duration: 0.05,
        electronic_noise: true,
        ..Default::default()
    };
    let quiet = SignalModel::new(0.0, 0.0, 1.0).unwrap();
    let m = ModulationSpec::new(0.0, DEFAULT_MODULATION_FREQUENCY).unwrap();
    let rec = su11sim::detection::synthesize(&quiet, &m, &acq, 5).unwrap();
    let tr = power_spectrum(&rec, DEFAULT_RBW, Some(DEFAULT_VBW)).unwrap();
    // vacuum plus electronics is still the reference level
    assert!(tr.mean_db_in(BAND.0, BAND.1).unwrap().abs() < 0.1);
    let v = rec.sample_variance();
    assert!((v - 1.1).abs() < 0.01, "{v}");
}
