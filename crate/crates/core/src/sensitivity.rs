//! Minimum detectable phase, shot-noise bounds and log-log scaling fits.
//!
//! Phase-sensing photon numbers here count coherent photons in one phase arm
//! during the effective integration time `T_eff = 1/(4·RBW)` of an analyzer
//! bin. With the matched Mach-Zehnder of equal arm photons `n`, the classical
//! phase-sensing number is `N = 2n`, the Mach-Zehnder detects `1/√N` and an
//! ideal SU(1,1) interferometer `1/√(2GN)`.

use rayon::prelude::*;

use crate::detection::{
    effective_time, synthesize, AcquisitionSettings, ModulationSpec, SegmentSpectra,
    SignalModel, DEFAULT_MODULATION_FREQUENCY, DEFAULT_RBW, DEFAULT_SAMPLE_RATE, DEFAULT_VBW,
};
use crate::error::{Error, Result};
use crate::interferometer::{InterferometerConfig, Topology};

pub const WAVELENGTH: f64 = 795e-9;
const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;

/// Bisection bracket for the modulation depth, in rad.
pub const DEPTH_RANGE: (f64, f64) = (1e-7, 1e-2);
/// Fewest seeds averaged per candidate depth.
pub const MIN_SEEDS: usize = 20;
/// Peak-to-floor power ratio of a just-detectable tone (3 dB).
pub const DETECTION_RATIO: f64 = 2.0;

/// Ideal SU(1,1) bound `1/√(2GN)`.
pub fn theoretical_min_phase(gain: f64, photons: f64) -> Result<f64> {
    if !(gain >= 1.0) {
        return Err(Error::invalid(format!("gain must be >= 1, got {gain}")));
    }
    if !(photons > 0.0) {
        return Err(Error::invalid(format!("photon number must be positive, got {photons}")));
    }
    Ok(1.0 / (2.0 * gain * photons).sqrt())
}

/// Shot-noise bound of a Mach-Zehnder, `1/√N`.
pub fn theoretical_min_phase_mzi(photons: f64) -> Result<f64> {
    if !(photons > 0.0) {
        return Err(Error::invalid(format!("photon number must be positive, got {photons}")));
    }
    Ok(1.0 / photons.sqrt())
}

/// Optical power in µW of a photon flux at [`WAVELENGTH`].
pub fn photon_flux_to_microwatts(flux: f64) -> f64 {
    flux * PLANCK * LIGHT_SPEED / WAVELENGTH * 1e6
}

pub fn microwatts_to_photon_flux(microwatts: f64) -> f64 {
    microwatts * 1e-6 * WAVELENGTH / (PLANCK * LIGHT_SPEED)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityPoint {
    /// Coherent phase-arm photons per `T_eff`.
    pub i_ps: f64,
    pub delta_phi_min: f64,
    /// Seed-to-seed spread of the crossing depth.
    pub uncertainty: f64,
    pub topology: Topology,
    pub n_seeds: usize,
}

impl SensitivityPoint {
    /// Phase-arm power in µW for analyzer bandwidth `rbw`.
    pub fn i_ps_microwatts(&self, rbw: f64) -> f64 {
        photon_flux_to_microwatts(self.i_ps / effective_time(rbw))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub modulation_frequency: f64,
    pub sample_rate: f64,
    pub rbw: f64,
    pub vbw: Option<f64>,
    /// Record length per seed in s.
    pub duration: f64,
    pub noise_band: (f64, f64),
    pub electronic_noise: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            modulation_frequency: DEFAULT_MODULATION_FREQUENCY,
            sample_rate: DEFAULT_SAMPLE_RATE,
            rbw: DEFAULT_RBW,
            vbw: Some(DEFAULT_VBW),
            duration: 0.01,
            noise_band: (0.6e6, 2.6e6),
            electronic_noise: false,
        }
    }
}

impl SweepSettings {
    pub fn acquisition(&self) -> AcquisitionSettings {
        AcquisitionSettings {
            duration: self.duration,
            sample_rate: self.sample_rate,
            electronic_noise: self.electronic_noise,
        }
    }

    /// Closed-form depth at which the noise-subtracted S/N reaches 1.
    pub fn predicted_min_phase(&self, model: &SignalModel) -> f64 {
        let acq = self.acquisition();
        let snr_per_rad2 = model.predicted_snr(1.0, self.sample_rate, self.rbw, acq.electronic_variance());
        1.0 / snr_per_rad2.sqrt()
    }
}

/// Seed-averaged analyzer readings around `f0` as the tone depth varies,
/// with the noise of each seed frozen.
pub struct ToneProbe {
    tone: SegmentSpectra,
    noise: Vec<SegmentSpectra>,
}

impl ToneProbe {
    pub fn new(model: &SignalModel, settings: &SweepSettings, seeds: &[u64]) -> Result<Self> {
        let acq = settings.acquisition();
        let quiet = ModulationSpec::new(0.0, settings.modulation_frequency)?;
        let n = acq.n_samples()?;
        let w = 2.0 * std::f64::consts::PI * settings.modulation_frequency / settings.sample_rate;
        let unit: Vec<f64> = (0..n)
            .map(|k| model.slope_per_sample * (w * k as f64).sin())
            .collect();
        let reference = acq.shot_noise_reference();
        let spectra = |samples: &[f64]| {
            SegmentSpectra::new(
                samples,
                settings.sample_rate,
                reference,
                settings.rbw,
                settings.vbw,
                settings.modulation_frequency,
                settings.noise_band,
            )
        };
        let tone = spectra(&unit)?;
        let noise = seeds
            .par_iter()
            .map(|&seed| spectra(&synthesize(model, &quiet, &acq, seed)?.samples))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tone, noise })
    }

    /// Peak-to-floor ratio of each seed at `depth`, in seed order.
    pub fn ratios(&self, depth: f64) -> Result<Vec<f64>> {
        self.noise
            .par_iter()
            .map(|n| Ok(n.snr_with(&self.tone, depth)?.ratio))
            .collect()
    }

    pub fn mean_ratio(&self, depth: f64) -> Result<f64> {
        let r = self.ratios(depth)?;
        Ok(r.iter().sum::<f64>() / r.len() as f64)
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Depth at which the seed-averaged peak reaches 3 dB over the floor,
/// for an explicit signal model.
pub fn min_detectable_phase_for_model(
    model: &SignalModel,
    i_ps: f64,
    topology: Topology,
    settings: &SweepSettings,
    seeds: &[u64],
) -> Result<SensitivityPoint> {
    if seeds.len() < MIN_SEEDS {
        return Err(Error::invalid(format!(
            "need at least {MIN_SEEDS} seeds per depth, got {}",
            seeds.len()
        )));
    }
    let probe = ToneProbe::new(model, settings, seeds)?;
    let (mut lo, mut hi) = (DEPTH_RANGE.0.ln(), DEPTH_RANGE.1.ln());
    let below = probe.mean_ratio(lo.exp())?;
    let above = probe.mean_ratio(hi.exp())?;
    if !(below < DETECTION_RATIO && above >= DETECTION_RATIO) {
        return Err(Error::OutOfRange(format!(
            "detection threshold not bracketed in [{:e}, {:e}] rad (mean ratios {below:.4}, {above:.4})",
            DEPTH_RANGE.0, DEPTH_RANGE.1
        )));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if probe.mean_ratio(mid.exp())? >= DETECTION_RATIO {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let delta = (0.5 * (lo + hi)).exp();
    // ratio ≈ 1 + (δ/δ_min)², so dδ = δ·dratio/2 at the crossing
    let uncertainty = delta * std_dev(&probe.ratios(delta)?) / 2.0;
    Ok(SensitivityPoint {
        i_ps,
        delta_phi_min: delta,
        uncertainty,
        topology,
        n_seeds: seeds.len(),
    })
}

/// Coherent phase-arm photons of `config` per `T_eff`.
pub fn phase_arm_photons_per_bin(config: &InterferometerConfig, rbw: f64) -> Result<f64> {
    Ok(crate::interferometer::phase_arm_photons(config)?.coherent * effective_time(rbw))
}

/// Minimum detectable phase of `config` locked at the dark fringe.
pub fn min_detectable_phase(
    config: &InterferometerConfig,
    settings: &SweepSettings,
    seeds: &[u64],
) -> Result<SensitivityPoint> {
    let model = SignalModel::locked(config, settings.sample_rate)?;
    let i_ps = phase_arm_photons_per_bin(config, settings.rbw)?;
    min_detectable_phase_for_model(&model, i_ps, config.topology, settings, seeds)
}

/// Sweep over phase-arm photon numbers per `T_eff`, rescaling the seed of
/// `config` for each point.
pub fn sensitivity_sweep(
    config: &InterferometerConfig,
    i_ps_values: &[f64],
    settings: &SweepSettings,
    seeds: &[u64],
) -> Result<Vec<SensitivityPoint>> {
    i_ps_values
        .iter()
        .map(|&n| {
            let cfg = config.with_phase_arm_coherent(n / effective_time(settings.rbw))?;
            min_detectable_phase(&cfg, settings, seeds)
        })
        .collect()
}

/// `log10 δ = intercept + slope·log10 I_ps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub residual_rms: f64,
    /// Mean of `log10 I_ps` over the fitted points.
    pub x_mean: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn eval_log(&self, log10_i_ps: f64) -> f64 {
        self.intercept + self.slope * log10_i_ps
    }
}

pub fn loglog_fit(points: &[SensitivityPoint]) -> Result<FitResult> {
    let xs: Vec<f64> = points.iter().map(|p| p.i_ps).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.delta_phi_min).collect();
    fit_power_law(&xs, &ys)
}

/// Least-squares line through `(log10 x, log10 y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit("all values must be positive".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let mut sorted = lx.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] < 1e-12) {
        return Err(Error::DegenerateFit("abscissae must be distinct".into()));
    }
    if sorted[sorted.len() - 1] - sorted[0] < 1.0 - 1e-12 {
        return Err(Error::DegenerateFit("abscissae span less than one decade".into()));
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        residual_rms: (ssr / n).sqrt(),
        x_mean: mx,
        n_points: lx.len(),
    })
}

/// Vertical gap between two fitted lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Improvement {
    /// `δ_MZI / δ_SUI` at the evaluation point.
    pub ratio: f64,
    /// `20·log10(ratio)`.
    pub amplitude_db: f64,
    /// `10·log10(ratio)`.
    pub power_db: f64,
    /// `log10 I_ps` where the gap is evaluated.
    pub at_log10_i_ps: f64,
}

/// Gap between the lines at the mean log abscissa of both sweeps.
pub fn improvement_db(sui: &FitResult, mzi: &FitResult) -> Result<Improvement> {
    if !((sui.slope - mzi.slope).abs() < 0.1) {
        return Err(Error::IncompatibleSlopes {
            sui: sui.slope,
            mzi: mzi.slope,
        });
    }
    let x = 0.5 * (sui.x_mean + mzi.x_mean);
    let d = mzi.eval_log(x) - sui.eval_log(x);
    Ok(Improvement {
        ratio: 10f64.powf(d),
        amplitude_db: 20.0 * d,
        power_db: 10.0 * d,
        at_log10_i_ps: x,
    })
}

/// Geometric grid of `n` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn point(i_ps: f64, d: f64) -> SensitivityPoint {
        SensitivityPoint {
            i_ps,
            delta_phi_min: d,
            uncertainty: 0.0,
            topology: Topology::Mzi,
            n_seeds: 20,
        }
    }

    #[test]
    fn bounds() {
        assert!((theoretical_min_phase(1.0, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((theoretical_min_phase(2.0, 1e8).unwrap() - 5e-5).abs() < 1e-18);
        for g in [1.0, 3.0, 5.0] {
            let r = theoretical_min_phase(g, 3e7).unwrap() / theoretical_min_phase_mzi(3e7).unwrap();
            assert!((r - 1.0 / (2.0 * g).sqrt()).abs() < 1e-14);
        }
        assert!(theoretical_min_phase(2.0, 0.0).is_err());
        assert!(theoretical_min_phase_mzi(-1.0).is_err());
        assert!(theoretical_min_phase(0.5, 1.0).is_err());
    }

    #[test]
    fn microwatt_conversion() {
        let flux = microwatts_to_photon_flux(5.0);
        assert!((flux / 2.0011e13 - 1.0).abs() < 1e-3);
        assert!((photon_flux_to_microwatts(flux) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_laws() {
        let xs = log_grid(1e6, 1e8, 9);
        let pts: Vec<_> = xs.iter().map(|&x| point(x, 3.0 * x.powf(-0.5))).collect();
        let f = loglog_fit(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.log10()).abs() < 1e-12);
        assert!(f.residual_rms < 1e-13 && f.slope_stderr < 1e-12);

        let flat: Vec<_> = xs.iter().map(|&x| point(x, 1e-4)).collect();
        assert!(loglog_fit(&flat).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn fit_preconditions() {
        assert!(matches!(loglog_fit(&[point(1.0, 1.0)]), Err(Error::DegenerateFit(_))));
        let same = [point(10.0, 1.0), point(10.0, 2.0), point(100.0, 1.0)];
        assert!(loglog_fit(&same).is_err());
        let narrow = [point(10.0, 1.0), point(20.0, 2.0), point(50.0, 1.0)];
        assert!(loglog_fit(&narrow).is_err());
    }

    #[test]
    fn improvement_conventions() {
        let xs = log_grid(1e6, 1e8, 5);
        let mzi_pts: Vec<_> = xs.iter().map(|&x| point(x, x.powf(-0.5))).collect();
        let mzi = loglog_fit(&mzi_pts).unwrap();
        assert_eq!(improvement_db(&mzi, &mzi).unwrap().amplitude_db, 0.0);

        let sui_pts: Vec<_> = xs
            .iter()
            .map(|&x| point(x, x.powf(-0.5) / 10f64.sqrt()))
            .collect();
        let imp = improvement_db(&loglog_fit(&sui_pts).unwrap(), &mzi).unwrap();
        assert!((imp.amplitude_db - 10.0).abs() < 1e-9);
        assert!((imp.power_db - 5.0).abs() < 1e-9);

        let half: Vec<_> = xs.iter().map(|&x| point(x, x.powf(-0.5) / 2.0)).collect();
        let imp = improvement_db(&loglog_fit(&half).unwrap(), &mzi).unwrap();
        assert!((imp.amplitude_db - 6.0206).abs() < 1e-4);
        assert!((imp.power_db - 3.0103).abs() < 1e-4);

        let steep: Vec<_> = xs.iter().map(|&x| point(x, x.powf(-0.7))).collect();
        assert!(matches!(
            improvement_db(&loglog_fit(&steep).unwrap(), &mzi),
            Err(Error::IncompatibleSlopes { .. })
        ));
    }

    #[test]
    fn noiseless_model_is_rejected() {
        assert!(SignalModel::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn too_few_seeds() {
        let model = SignalModel::new(0.0, 1.0, 1.0).unwrap();
        let seeds: Vec<u64> = (0..5).collect();
        let r = min_detectable_phase_for_model(&model, 1.0, Topology::Mzi, &SweepSettings::default(), &seeds);
        assert!(r.is_err());
    }

    #[test]
    fn unbracketed_threshold() {
        let cfg = InterferometerConfig::mzi(Complex64::new(1.0, 0.0), true);
        let seeds: Vec<u64> = (0..20).collect();
        let r = min_detectable_phase(&cfg, &SweepSettings::default(), &seeds);
        assert!(matches!(r, Err(Error::OutOfRange(_))));
    }

    #[test]
    fn mzi_matches_shot_noise_bound() {
        let settings = SweepSettings::default();
        let cfg = InterferometerConfig::mzi(Complex64::new(1.0, 0.0), true)
            .with_phase_arm_coherent(1e8 / effective_time(settings.rbw))
            .unwrap();
        let seeds: Vec<u64> = (0..20).collect();
        let p = min_detectable_phase(&cfg, &settings, &seeds).unwrap();
        assert!((p.i_ps / 1e8 - 1.0).abs() < 1e-9);
        let bound = theoretical_min_phase_mzi(2.0 * p.i_ps).unwrap();
        assert!((p.delta_phi_min / bound - 1.0).abs() < 0.05, "{} vs {bound}", p.delta_phi_min);
        assert!(p.uncertainty > 0.0 && p.uncertainty < p.delta_phi_min);
        let model = SignalModel::locked(&cfg, settings.sample_rate).unwrap();
        assert!((settings.predicted_min_phase(&model) / bound - 1.0).abs() < 1e-9);
    }
}
