//! Homodyne photocurrent synthesis and spectrum-analyzer emulation.
//!
//! Samples are in shot-noise units: an ideal vacuum record has unit variance
//! per sample. For synthesis `|seed_alpha|²` is a photon flux, so a sample of
//! length `dt` sees a seed amplitude `α·√dt`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::interferometer::{build_state, homodyne_response, InterferometerConfig, PHASE_MODE};
use crate::table::Table;

pub mod calibration;
pub mod spectrum;

pub use calibration::{calibrate_phase, EomReference, PhaseLookup};
pub use spectrum::{
    power_spectrum, snr_at, swept_spectrum, SegmentSpectra, SnrReading, SpectrumTrace,
    SNR_CAP_DB,
};

pub const DEFAULT_SAMPLE_RATE: f64 = 10.0e6;
pub const DEFAULT_RBW: f64 = 100.0e3;
pub const DEFAULT_VBW: f64 = 100.0;
pub const DEFAULT_MODULATION_FREQUENCY: f64 = 1.6e6;
/// Electronic noise variance relative to shot noise (10 dB below).
pub const ELECTRONIC_NOISE_RATIO: f64 = 0.1;
/// Largest depth treated by the linearised signal model.
pub const MAX_DEPTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    /// Phase modulation amplitude δ in rad.
    pub depth: f64,
    pub frequency: f64,
}

impl ModulationSpec {
    pub fn new(depth: f64, frequency: f64) -> Result<Self> {
        if !(depth >= 0.0 && depth < MAX_DEPTH) {
            return Err(Error::invalid(format!(
                "modulation depth {depth} rad is outside the small-signal range [0, {MAX_DEPTH})"
            )));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::invalid(format!(
                "modulation frequency must be positive, got {frequency}"
            )));
        }
        Ok(Self { depth, frequency })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionSettings {
    /// Record length in s.
    pub duration: f64,
    pub sample_rate: f64,
    /// Adds white electronic noise at [`ELECTRONIC_NOISE_RATIO`].
    pub electronic_noise: bool,
}

impl Default for AcquisitionSettings {
    fn default() -> Self {
        Self {
            duration: 0.01,
            sample_rate: DEFAULT_SAMPLE_RATE,
            electronic_noise: false,
        }
    }
}

impl AcquisitionSettings {
    pub fn n_samples(&self) -> Result<usize> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration must be positive"));
        }
        let n = (self.duration * self.sample_rate).round();
        if n < 1.0 || n > 1e9 {
            return Err(Error::invalid(format!("record of {n} samples is not supported")));
        }
        Ok(n as usize)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn electronic_variance(&self) -> f64 {
        if self.electronic_noise {
            ELECTRONIC_NOISE_RATIO
        } else {
            0.0
        }
    }

    /// Variance of a vacuum-input record under these settings.
    pub fn shot_noise_reference(&self) -> f64 {
        1.0 + self.electronic_variance()
    }
}

/// Linearised response of the detected quadrature around the lock point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalModel {
    pub lo_phase: f64,
    /// Quadrature displacement per rad of phase, per sample.
    pub slope_per_sample: f64,
    /// Optical quadrature variance at the lock point.
    pub variance: f64,
}

impl SignalModel {
    pub fn new(lo_phase: f64, slope_per_sample: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid(format!(
                "lock-point variance must be positive, got {variance}"
            )));
        }
        if !slope_per_sample.is_finite() {
            return Err(Error::invalid("slope must be finite"));
        }
        Ok(Self {
            lo_phase,
            slope_per_sample,
            variance,
        })
    }

    /// Model at `φ = π` with the LO angle that maximises the slope.
    pub fn locked(config: &InterferometerConfig, sample_rate: f64) -> Result<Self> {
        let resp = homodyne_response(config, PI)?;
        Self::new(resp.lo_phase, resp.slope / sample_rate.sqrt(), resp.variance)
    }

    /// Closed-form noise-subtracted S/N of a tone of depth `depth` in an
    /// analyzer bin of width `rbw`: `K²δ²·T_eff/Var` with `T_eff = 1/(4·RBW)`.
    pub fn predicted_snr(&self, depth: f64, sample_rate: f64, rbw: f64, electronic: f64) -> f64 {
        let k2 = self.slope_per_sample.powi(2) * sample_rate;
        k2 * depth * depth / (4.0 * rbw) / (self.variance + electronic)
    }
}

/// Effective integration time of one analyzer bin.
pub fn effective_time(rbw: f64) -> f64 {
    1.0 / (4.0 * rbw)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub shot_noise_reference: f64,
    pub rng_seed: u64,
    pub lo_phase: f64,
    /// Tone amplitude per sample, `K·δ`.
    pub tone_amplitude: f64,
    pub modulation_frequency: f64,
    /// Optical variance at the lock point (electronic noise excluded).
    pub lock_variance: f64,
}

impl DetectionRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_variance(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = self.samples.iter().sum::<f64>() / n;
        self.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["time_s", "photocurrent_sn"])
            .with_meta("units", "time in s, photocurrent in shot-noise units")
            .with_meta("sample_rate_hz", self.sample_rate)
            .with_meta("shot_noise_reference", self.shot_noise_reference)
            .with_meta("rng_seed", self.rng_seed)
            .with_meta("lo_phase_rad", self.lo_phase)
            .with_meta("tone_amplitude_sn", self.tone_amplitude)
            .with_meta("modulation_frequency_hz", self.modulation_frequency)
            .with_meta("lock_variance", self.lock_variance);
        t.rows = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, &x)| vec![k as f64 / self.sample_rate, x])
            .collect();
        t
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let num = |key: &str| -> Result<f64> {
            table
                .meta(key)
                .ok_or_else(|| Error::Table(format!("missing `{key}`")))?
                .parse::<f64>()
                .map_err(|_| Error::Table(format!("`{key}` is not a number")))
        };
        let seed = table
            .meta("rng_seed")
            .ok_or_else(|| Error::Table("missing `rng_seed`".into()))?
            .parse::<u64>()
            .map_err(|_| Error::Table("`rng_seed` is not an integer".into()))?;
        let samples = table
            .column("photocurrent_sn")
            .ok_or_else(|| Error::Table("missing column `photocurrent_sn`".into()))?;
        Ok(Self {
            samples,
            sample_rate: num("sample_rate_hz")?,
            shot_noise_reference: num("shot_noise_reference")?,
            rng_seed: seed,
            lo_phase: num("lo_phase_rad")?,
            tone_amplitude: num("tone_amplitude_sn")?,
            modulation_frequency: num("modulation_frequency_hz")?,
            lock_variance: num("lock_variance")?,
        })
    }
}

fn check_nyquist(frequency: f64, sample_rate: f64) -> Result<()> {
    if sample_rate <= 2.0 * frequency {
        return Err(Error::invalid(format!(
            "sample rate {sample_rate} Hz must exceed twice the modulation frequency {frequency} Hz"
        )));
    }
    Ok(())
}

/// Record from an explicit signal model: `K·δ·sin(2πft) + n(t)`.
pub fn synthesize(
    model: &SignalModel,
    modulation: &ModulationSpec,
    acquisition: &AcquisitionSettings,
    seed: u64,
) -> Result<DetectionRecord> {
    check_nyquist(modulation.frequency, acquisition.sample_rate)?;
    let n = acquisition.n_samples()?;
    let sigma = (model.variance + acquisition.electronic_variance()).sqrt();
    let amp = model.slope_per_sample * modulation.depth;
    let w = 2.0 * PI * modulation.frequency / acquisition.sample_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|k| {
            let z: f64 = StandardNormal.sample(&mut rng);
            amp * (w * k as f64).sin() + sigma * z
        })
        .collect();
    Ok(DetectionRecord {
        samples,
        sample_rate: acquisition.sample_rate,
        shot_noise_reference: acquisition.shot_noise_reference(),
        rng_seed: seed,
        lo_phase: model.lo_phase,
        tone_amplitude: amp,
        modulation_frequency: modulation.frequency,
        lock_variance: model.variance,
    })
}

/// Homodyne record of the detected port, locked at the dark fringe, with a
/// phase modulation applied inside the interferometer.
pub fn simulate_photocurrent(
    config: &InterferometerConfig,
    modulation: &ModulationSpec,
    acquisition: &AcquisitionSettings,
    seed: u64,
) -> Result<DetectionRecord> {
    let model = SignalModel::locked(config, acquisition.sample_rate)?;
    synthesize(&model, modulation, acquisition, seed)
}

/// Noise-only record of an arbitrary state, measured on `mode` at `lo_phase`.
pub fn simulate_state_noise(
    state: &GaussianState,
    mode: usize,
    lo_phase: f64,
    acquisition: &AcquisitionSettings,
    seed: u64,
) -> Result<DetectionRecord> {
    let model = SignalModel::new(lo_phase, 0.0, state.quadrature_variance(mode, lo_phase)?)?;
    let quiet = ModulationSpec::new(0.0, 1.0)?;
    synthesize(&model, &quiet, acquisition, seed)
}

/// `c₀ + Σ_{m=1,2} (a_m cos mφ + b_m sin mφ)`; the quadrature variance of a
/// Gaussian state is such a polynomial in the internal phase.
struct TrigPoly2 {
    c0: f64,
    a: [f64; 2],
    b: [f64; 2],
}

impl TrigPoly2 {
    fn fit(f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let n = 5;
        let values = (0..n)
            .map(|k| f(2.0 * PI * k as f64 / n as f64))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self {
            c0: values.iter().sum::<f64>() / n as f64,
            a: [0.0; 2],
            b: [0.0; 2],
        };
        for m in 1..=2 {
            for (k, v) in values.iter().enumerate() {
                let th = 2.0 * PI * (m * k) as f64 / n as f64;
                out.a[m - 1] += 2.0 * v * th.cos() / n as f64;
                out.b[m - 1] += 2.0 * v * th.sin() / n as f64;
            }
        }
        Ok(out)
    }

    fn eval(&self, phi: f64) -> f64 {
        self.c0
            + self.a[0] * phi.cos()
            + self.b[0] * phi.sin()
            + self.a[1] * (2.0 * phi).cos()
            + self.b[1] * (2.0 * phi).sin()
    }
}

/// Noise record while `φ` is swept linearly through `periods` fringes over
/// the record, starting at the dark fringe. The LO stays at the lock angle.
pub fn simulate_phase_scan(
    config: &InterferometerConfig,
    periods: f64,
    acquisition: &AcquisitionSettings,
    seed: u64,
) -> Result<DetectionRecord> {
    let n = acquisition.n_samples()?;
    let lo = homodyne_response(config, PI)?.lo_phase;
    let poly = TrigPoly2::fit(|phi| build_state(config, phi)?.quadrature_variance(PHASE_MODE, lo))?;
    let electronic = acquisition.electronic_variance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|k| {
            let phi = PI + 2.0 * PI * periods * k as f64 / n as f64;
            let var = poly.eval(phi).max(0.0) + electronic;
            let z: f64 = StandardNormal.sample(&mut rng);
            var.sqrt() * z
        })
        .collect();
    Ok(DetectionRecord {
        samples,
        sample_rate: acquisition.sample_rate,
        shot_noise_reference: acquisition.shot_noise_reference(),
        rng_seed: seed,
        lo_phase: lo,
        tone_amplitude: 0.0,
        modulation_frequency: 0.0,
        lock_variance: poly.eval(PI),
    })
}
