//! Run configuration, read from TOML with one table per module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use su11sim::detection::{
    effective_time, DEFAULT_MODULATION_FREQUENCY, DEFAULT_RBW, DEFAULT_SAMPLE_RATE, DEFAULT_VBW,
};
use su11sim::interferometer::{
    ActuatorMap, InterferometerConfig, LockController, Topology, DEFAULT_TRANSMISSION,
};
use su11sim::sensitivity::SweepSettings;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyName {
    Sui,
    Mzi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterferometerSection {
    pub topology: TopologyName,
    pub gain1: f64,
    pub gain2: f64,
    pub seed_re: f64,
    pub seed_im: f64,
    pub eta_internal: f64,
    pub eta_detection: f64,
    pub seed_compensation: bool,
}

impl Default for InterferometerSection {
    fn default() -> Self {
        Self {
            topology: TopologyName::Sui,
            gain1: 3.0,
            gain2: 3.0,
            seed_re: 1.0,
            seed_im: 0.0,
            eta_internal: DEFAULT_TRANSMISSION,
            eta_detection: DEFAULT_TRANSMISSION,
            seed_compensation: true,
        }
    }
}

impl InterferometerSection {
    pub fn build(&self) -> InterferometerConfig {
        InterferometerConfig {
            topology: match self.topology {
                TopologyName::Sui => Topology::Sui,
                TopologyName::Mzi => Topology::Mzi,
            },
            gain1: self.gain1,
            gain2: self.gain2,
            seed_alpha: Complex64::new(self.seed_re, self.seed_im),
            eta_internal: self.eta_internal,
            eta_detection: self.eta_detection,
            seed_compensation: self.seed_compensation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FringeSection {
    /// Phase points over [0, 2π).
    pub points: usize,
}

impl Default for FringeSection {
    fn default() -> Self {
        Self { points: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub sample_rate: f64,
    pub rbw: f64,
    /// Video bandwidth in Hz; 0 disables the video filter.
    pub vbw: f64,
    /// Record length per seed in s.
    pub duration: f64,
    pub modulation_frequency: f64,
    pub electronic_noise: bool,
    pub band_start: f64,
    pub band_stop: f64,
    /// Coherent phase-arm photons per effective bin time; 0 keeps the seed
    /// amplitude as given (read as a photon flux per second).
    pub phase_arm_photons: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            rbw: DEFAULT_RBW,
            vbw: DEFAULT_VBW,
            duration: 0.01,
            modulation_frequency: DEFAULT_MODULATION_FREQUENCY,
            electronic_noise: false,
            band_start: 0.6e6,
            band_stop: 2.6e6,
            phase_arm_photons: 1e8,
        }
    }
}

impl DetectionSection {
    pub fn vbw(&self) -> Option<f64> {
        (self.vbw > 0.0).then_some(self.vbw)
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            modulation_frequency: self.modulation_frequency,
            sample_rate: self.sample_rate,
            rbw: self.rbw,
            vbw: self.vbw(),
            duration: self.duration,
            noise_band: (self.band_start, self.band_stop),
            electronic_noise: self.electronic_noise,
        }
    }

    /// Photon flux matching `phase_arm_photons`.
    pub fn phase_arm_flux(&self) -> Option<f64> {
        (self.phase_arm_photons > 0.0).then(|| self.phase_arm_photons / effective_time(self.rbw))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpectrumSection {
    /// Record length of each trace in s.
    pub duration: f64,
    /// Fringes swept across the scanned trace.
    pub scan_periods: f64,
}

impl Default for NoiseSpectrumSection {
    fn default() -> Self {
        Self {
            duration: 0.1,
            scan_periods: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrSection {
    /// Modulation depths in rad.
    pub depths: Vec<f64>,
    pub seeds: usize,
}

impl Default for SnrSection {
    fn default() -> Self {
        Self {
            depths: vec![4.7e-5, 3.1e-5, 2.4e-5],
            seeds: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivitySection {
    /// Phase-arm photons per bin time at the ends of the sweep.
    pub i_ps_min: f64,
    pub i_ps_max: f64,
    pub points: usize,
    pub seeds: usize,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            i_ps_min: 1e7,
            i_ps_max: 1e9,
            points: 9,
            seeds: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockSection {
    pub proportional_gain: f64,
    pub integral_gain: f64,
    pub setpoint: f64,
    pub dither_amplitude: f64,
    pub dither_frequency: f64,
    pub samples_per_period: usize,
    pub actuator_linear: f64,
    pub actuator_cubic: f64,
    pub steps: usize,
    /// Random-walk disturbance in rad per square-root step.
    pub disturbance: f64,
    /// Constant phase drift in rad per step.
    pub drift: f64,
}

impl Default for LockSection {
    fn default() -> Self {
        let c = LockController::default();
        Self {
            proportional_gain: c.proportional_gain,
            integral_gain: c.integral_gain,
            setpoint: c.setpoint,
            dither_amplitude: c.dither_amplitude,
            dither_frequency: c.dither_frequency,
            samples_per_period: c.samples_per_period,
            actuator_linear: c.actuator.linear,
            actuator_cubic: c.actuator.cubic,
            steps: 20_000,
            disturbance: 1e-4,
            drift: 0.0,
        }
    }
}

impl LockSection {
    pub fn controller(&self) -> LockController {
        LockController {
            proportional_gain: self.proportional_gain,
            integral_gain: self.integral_gain,
            setpoint: self.setpoint,
            dither_amplitude: self.dither_amplitude,
            dither_frequency: self.dither_frequency,
            samples_per_period: self.samples_per_period,
            actuator: ActuatorMap {
                linear: self.actuator_linear,
                cubic: self.actuator_cubic,
            },
            ..LockController::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub max_gain: f64,
    pub cutoff: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            max_gain: 1.5,
            cutoff: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub interferometer: InterferometerSection,
    pub fringe: FringeSection,
    pub detection: DetectionSection,
    /// Present when `fringe` should also emit the noise traces.
    pub noise_spectrum: Option<NoiseSpectrumSection>,
    pub snr: SnrSection,
    pub sensitivity: SensitivitySection,
    pub lock: LockSection,
    pub oracle: OracleSection,
}

/// Parsed configuration plus the text its hash is taken over.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub text: String,
    pub hash: String,
}

impl LoadedConfig {
    pub fn from_text(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        validate(&config).map_err(|msg| CliError::Config(format!("{origin}: {msg}")))?;
        Ok(Self {
            config,
            text: text.to_string(),
            hash: sha256_hex(text),
        })
    }

    /// Canonical serialisation of an in-memory configuration.
    pub fn from_config(config: RunConfig) -> Result<Self, CliError> {
        let text = toml::to_string(&config)
            .map_err(|e| CliError::Config(format!("cannot serialise configuration: {e}")))?;
        validate(&config).map_err(CliError::Config)?;
        Ok(Self {
            hash: sha256_hex(&text),
            text,
            config,
        })
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

fn validate(c: &RunConfig) -> Result<(), String> {
    c.interferometer
        .build()
        .validate()
        .map_err(|e| format!("[interferometer] {e}"))?;
    if c.fringe.points < 2 {
        return Err("[fringe] points must be at least 2".into());
    }
    let d = &c.detection;
    positive("[detection] sample_rate", d.sample_rate)?;
    positive("[detection] rbw", d.rbw)?;
    positive("[detection] duration", d.duration)?;
    positive("[detection] modulation_frequency", d.modulation_frequency)?;
    if d.vbw < 0.0 {
        return Err("[detection] vbw must be >= 0".into());
    }
    if d.phase_arm_photons < 0.0 {
        return Err("[detection] phase_arm_photons must be >= 0".into());
    }
    if !(d.band_start < d.band_stop) {
        return Err("[detection] band_start must be below band_stop".into());
    }
    if !(d.modulation_frequency >= d.band_start && d.modulation_frequency <= d.band_stop) {
        return Err("[detection] modulation_frequency must lie inside the noise band".into());
    }
    if let Some(n) = &c.noise_spectrum {
        positive("[noise_spectrum] duration", n.duration)?;
        if !n.scan_periods.is_finite() {
            return Err("[noise_spectrum] scan_periods must be finite".into());
        }
    }
    if c.snr.depths.is_empty() {
        return Err("[snr] depths must not be empty".into());
    }
    if c.snr.seeds == 0 {
        return Err("[snr] seeds must be at least 1".into());
    }
    let s = &c.sensitivity;
    positive("[sensitivity] i_ps_min", s.i_ps_min)?;
    positive("[sensitivity] i_ps_max", s.i_ps_max)?;
    if s.points == 0 {
        return Err("[sensitivity] points must be at least 1".into());
    }
    if s.points > 1 && !(s.i_ps_max > s.i_ps_min) {
        return Err("[sensitivity] i_ps_max must exceed i_ps_min".into());
    }
    if c.lock.steps == 0 {
        return Err("[lock] steps must be at least 1".into());
    }
    if c.oracle.cutoff < 2 {
        return Err("[oracle] cutoff must be at least 2".into());
    }
    Ok(())
}
