//! SU(1,1) and Mach-Zehnder topologies on two modes.
//!
//! Mode 0 carries the seed (the signal of the SU(1,1) interferometer, the
//! bright input port of the Mach-Zehnder). Mode 1 carries the phase `φ` (the
//! idler arm, or the second Mach-Zehnder arm) and is the detected output port.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModePair, SymplecticOp};

mod lock;

pub use lock::{
    lock_dark_fringe, random_walk_disturbance, ActuatorMap, LockController, LockTrace,
};

/// Seeded mode.
pub const SEED_MODE: usize = 0;
/// Mode carrying `φ`; also the detected output port.
pub const PHASE_MODE: usize = 1;

/// Default transmission of each cell/optics stage.
pub const DEFAULT_TRANSMISSION: f64 = 0.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Parametric amplifiers as splitter and combiner.
    Sui,
    /// 50:50 beam splitters as splitter and combiner.
    Mzi,
}

impl Topology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::Sui => "SUI",
            Topology::Mzi => "MZI",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    pub topology: Topology,
    /// Intensity gain of the first amplifier (SU(1,1) only).
    pub gain1: f64,
    /// Intensity gain of the second amplifier (SU(1,1) only).
    pub gain2: f64,
    /// Seed amplitude. In time-domain synthesis `|α|²` is read as a photon
    /// flux in photons per second.
    pub seed_alpha: Complex64,
    /// Transmission of each arm between splitter and combiner.
    pub eta_internal: f64,
    /// Transmission from the combiner to the detector.
    pub eta_detection: f64,
    /// Doubles the injected seed power of a Mach-Zehnder so that each arm
    /// receives the undivided seed.
    pub seed_compensation: bool,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Sui,
            gain1: 3.0,
            gain2: 3.0,
            seed_alpha: Complex64::new(1.0, 0.0),
            eta_internal: DEFAULT_TRANSMISSION,
            eta_detection: DEFAULT_TRANSMISSION,
            seed_compensation: false,
        }
    }
}

/// Photon number of the phase arm where `φ` is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseArm {
    /// `⟨a†a⟩`, including amplified vacuum.
    pub total: f64,
    /// `|⟨a⟩|²`, the part that carries the phase signal.
    pub coherent: f64,
}

impl InterferometerConfig {
    /// Lossless SU(1,1) interferometer.
    pub fn sui(gain1: f64, gain2: f64, seed_alpha: Complex64) -> Self {
        Self {
            topology: Topology::Sui,
            gain1,
            gain2,
            seed_alpha,
            eta_internal: 1.0,
            eta_detection: 1.0,
            seed_compensation: false,
        }
    }

    /// Lossless Mach-Zehnder interferometer.
    pub fn mzi(seed_alpha: Complex64, seed_compensation: bool) -> Self {
        Self {
            topology: Topology::Mzi,
            gain1: 1.0,
            gain2: 1.0,
            seed_alpha,
            eta_internal: 1.0,
            eta_detection: 1.0,
            seed_compensation,
        }
    }

    pub fn with_losses(mut self, eta_internal: f64, eta_detection: f64) -> Self {
        self.eta_internal = eta_internal;
        self.eta_detection = eta_detection;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.topology == Topology::Sui {
            for (name, g) in [("gain1", self.gain1), ("gain2", self.gain2)] {
                if !(g >= 1.0) || !g.is_finite() {
                    return Err(Error::invalid(format!("{name} must be >= 1, got {g}")));
                }
            }
        }
        for (name, eta) in [
            ("eta_internal", self.eta_internal),
            ("eta_detection", self.eta_detection),
        ] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {eta}")));
            }
        }
        if !self.seed_alpha.re.is_finite() || !self.seed_alpha.im.is_finite() {
            return Err(Error::invalid("seed amplitude must be finite"));
        }
        Ok(())
    }

    /// Amplitude actually injected, after seed compensation.
    pub fn injected_seed(&self) -> Complex64 {
        match (self.topology, self.seed_compensation) {
            (Topology::Mzi, true) => self.seed_alpha * 2f64.sqrt(),
            _ => self.seed_alpha,
        }
    }

    /// Mach-Zehnder partner of an SU(1,1) configuration under the fairness
    /// rule `I_ps(MZI) = 2·I_ps(SUI)`: seed compensation on, same losses, and
    /// each arm at the phase element carries the SU(1,1) phase-arm photons.
    pub fn matched_mzi(&self) -> Result<Self> {
        if self.topology != Topology::Sui {
            return Err(Error::invalid("matched_mzi expects an SU(1,1) configuration"));
        }
        self.validate()?;
        if self.eta_internal == 0.0 {
            return Err(Error::invalid("no light reaches the phase arm (eta_internal = 0)"));
        }
        let target = phase_sensing_intensity(self)?;
        let alpha = (target / self.eta_internal).sqrt();
        Ok(Self {
            topology: Topology::Mzi,
            gain1: 1.0,
            gain2: 1.0,
            seed_alpha: Complex64::new(alpha, 0.0),
            eta_internal: self.eta_internal,
            eta_detection: self.eta_detection,
            seed_compensation: true,
        })
    }

    /// Rescale the seed so the coherent photon number at the phase element
    /// equals `photons`.
    pub fn with_phase_arm_coherent(&self, photons: f64) -> Result<Self> {
        if !(photons > 0.0) {
            return Err(Error::invalid(format!(
                "phase-arm photon number must be positive, got {photons}"
            )));
        }
        self.validate()?;
        let per_unit = match self.topology {
            Topology::Sui => self.eta_internal * (self.gain1 - 1.0),
            Topology::Mzi => {
                let comp = if self.seed_compensation { 2.0 } else { 1.0 };
                self.eta_internal * comp / 2.0
            }
        };
        if per_unit <= 0.0 {
            return Err(Error::invalid(
                "configuration sends no coherent light into the phase arm",
            ));
        }
        let mut out = self.clone();
        let phase = if self.seed_alpha.norm() > 0.0 {
            self.seed_alpha.arg()
        } else {
            0.0
        };
        out.seed_alpha = Complex64::from_polar((photons / per_unit).sqrt(), phase);
        Ok(out)
    }
}

fn pair() -> ModePair {
    ModePair::new(SEED_MODE, PHASE_MODE).expect("distinct modes")
}

fn input_state(config: &InterferometerConfig) -> Result<GaussianState> {
    GaussianState::coherent(&[config.injected_seed(), Complex64::new(0.0, 0.0)])
}

fn splitter(config: &InterferometerConfig, gain: f64) -> Result<SymplecticOp> {
    match config.topology {
        Topology::Sui => SymplecticOp::two_mode_squeezer(2, gain, pair()),
        Topology::Mzi => SymplecticOp::beam_splitter(2, 0.5, pair()),
    }
}

/// State at the phase element, before `φ` is applied.
pub fn phase_arm_state(config: &InterferometerConfig) -> Result<GaussianState> {
    config.validate()?;
    input_state(config)?
        .apply(&splitter(config, config.gain1)?)?
        .apply_loss_all(&[SEED_MODE, PHASE_MODE], config.eta_internal)
}

/// Two-mode output state for phase `phi`:
/// splitter, internal loss, `φ` on mode 1, combiner, detection loss.
pub fn build_state(config: &InterferometerConfig, phi: f64) -> Result<GaussianState> {
    phase_arm_state(config)?
        .apply(&SymplecticOp::phase_shift(2, phi, PHASE_MODE)?)?
        .apply(&splitter(config, config.gain2)?)?
        .apply_loss_all(&[SEED_MODE, PHASE_MODE], config.eta_detection)
}

/// Output state with the phase arm blocked between splitter and combiner,
/// so the combiner sees vacuum in that input.
pub fn build_blocked_state(config: &InterferometerConfig) -> Result<GaussianState> {
    phase_arm_state(config)?
        .apply_loss(PHASE_MODE, 0.0)?
        .apply(&splitter(config, config.gain2)?)?
        .apply_loss_all(&[SEED_MODE, PHASE_MODE], config.eta_detection)
}

/// Total transmission `η` for which an amplifier of gain `G` on vacuum
/// reads `excess_db` above shot noise: `1 + 2(G - 1)η = 10^(dB/10)`.
pub fn efficiency_for_excess_noise(gain: f64, excess_db: f64) -> Result<f64> {
    if !(gain > 1.0) {
        return Err(Error::invalid(format!("gain must exceed 1, got {gain}")));
    }
    let eta = (10f64.powf(excess_db / 10.0) - 1.0) / (2.0 * (gain - 1.0));
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "{excess_db} dB is not reachable with gain {gain} (needs η = {eta})"
        )));
    }
    Ok(eta)
}

/// Symplectic part of the interferometer, losses excluded.
pub fn transfer_op(config: &InterferometerConfig, phi: f64) -> Result<SymplecticOp> {
    config.validate()?;
    splitter(config, config.gain1)?
        .then(&SymplecticOp::phase_shift(2, phi, PHASE_MODE)?)?
        .then(&splitter(config, config.gain2)?)
}

pub fn phase_arm_photons(config: &InterferometerConfig) -> Result<PhaseArm> {
    let state = phase_arm_state(config)?;
    Ok(PhaseArm {
        total: state.mean_photon_number(PHASE_MODE)?,
        coherent: state.coherent_photon_number(PHASE_MODE)?,
    })
}

/// Phase-sensing intensity.
///
/// SU(1,1): photons in the idler arm at the phase element,
/// `η_int·g₁(|α|² + 1)`. Mach-Zehnder: `I_ps^CL`, twice the photons in one
/// arm at the phase element, which is the injected seed when lossless.
pub fn phase_sensing_intensity(config: &InterferometerConfig) -> Result<f64> {
    config.validate()?;
    let alpha2 = config.injected_seed().norm_sqr();
    Ok(match config.topology {
        Topology::Sui => config.eta_internal * (config.gain1 - 1.0) * (alpha2 + 1.0),
        Topology::Mzi => config.eta_internal * alpha2,
    })
}

/// Idler-port intensity of a lossless SU(1,1) interferometer,
/// `|√(G₂g₁)e^{iφ} + √(G₁g₂)|²(|α|² + 1)`; for equal gains this is
/// `2Gg(|α|² + 1)(1 + cos φ)`.
pub fn sui_fringe_intensity(gain1: f64, gain2: f64, alpha_sq: f64, phi: f64) -> Result<f64> {
    for g in [gain1, gain2] {
        if !(g >= 1.0) || !g.is_finite() {
            return Err(Error::invalid(format!("gains must be >= 1, got {g}")));
        }
    }
    if !(alpha_sq >= 0.0) {
        return Err(Error::invalid(format!("|α|² must be >= 0, got {alpha_sq}")));
    }
    let (g1, g2) = (gain1 - 1.0, gain2 - 1.0);
    let transfer = if gain1 == gain2 {
        2.0 * gain1 * g1 * (1.0 + phi.cos())
    } else {
        gain2 * g1 + gain1 * g2 + 2.0 * (gain1 * gain2 * g1 * g2).sqrt() * phi.cos()
    };
    Ok(transfer.max(0.0) * (alpha_sq + 1.0))
}

/// Dark-port intensity of a Mach-Zehnder, `½·I_ps^CL·(1 + cos φ)`.
pub fn mzi_fringe_intensity(i_ps_cl: f64, phi: f64) -> Result<f64> {
    if !(i_ps_cl >= 0.0) {
        return Err(Error::invalid(format!(
            "phase-sensing intensity must be >= 0, got {i_ps_cl}"
        )));
    }
    Ok(0.5 * i_ps_cl * (1.0 + phi.cos()))
}

/// SU(1,1)-to-Mach-Zehnder output ratio under `I_ps^CL = 2·I_ps^NCL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeRatio {
    /// Ratio of the two fringe formulas, `2G`.
    pub derived: f64,
    /// Reciprocal convention, `1/(2G)`.
    pub inverse: f64,
}

pub fn fringe_ratio(gain: f64, alpha_sq: f64, phi: f64) -> Result<FringeRatio> {
    if 1.0 + phi.cos() <= 1e-6 {
        return Err(Error::invalid("fringe ratio is undefined at the dark fringe"));
    }
    let i_ps_ncl = (gain - 1.0) * (alpha_sq + 1.0);
    if i_ps_ncl <= 0.0 {
        return Err(Error::invalid("no phase-sensing field at unit gain"));
    }
    let sui = sui_fringe_intensity(gain, gain, alpha_sq, phi)?;
    let mzi = mzi_fringe_intensity(2.0 * i_ps_ncl, phi)?;
    Ok(FringeRatio {
        derived: sui / mzi,
        inverse: 1.0 / (2.0 * gain),
    })
}

/// Homodyne view of the detected port at a given phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneResponse {
    /// LO angle that maximises the phase slope.
    pub lo_phase: f64,
    /// `|∂⟨x_θ⟩/∂φ|` at that LO angle, per unit of seed amplitude scaling.
    pub slope: f64,
    /// Quadrature variance at that LO angle.
    pub variance: f64,
    /// Mean quadrature at that LO angle.
    pub mean: f64,
}

/// Slope and noise of the detected quadrature around `phi`.
///
/// The output mean is `C + A cos φ + B sin φ`, so the derivative is exact:
/// `m(φ + π/2) - (m(φ) + m(φ + π))/2`.
pub fn homodyne_response(config: &InterferometerConfig, phi: f64) -> Result<HomodyneResponse> {
    let block = |p: f64| -> Result<(f64, f64)> {
        let s = build_state(config, p)?;
        let k = 2 * PHASE_MODE;
        Ok((s.mean()[k], s.mean()[k + 1]))
    };
    let here = block(phi)?;
    let quarter = block(phi + PI / 2.0)?;
    let half = block(phi + PI)?;
    let dx = quarter.0 - 0.5 * (here.0 + half.0);
    let dp = quarter.1 - 0.5 * (here.1 + half.1);
    let slope = dx.hypot(dp);
    let lo_phase = if slope > 0.0 { dp.atan2(dx) } else { 0.0 };
    let state = build_state(config, phi)?;
    Ok(HomodyneResponse {
        lo_phase,
        slope,
        variance: state.quadrature_variance(PHASE_MODE, lo_phase)?,
        mean: state.quadrature_mean(PHASE_MODE, lo_phase)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    pub phi: f64,
    /// Mean photon number at the detected port.
    pub intensity: f64,
    /// Quadrature variance at the lock-point LO angle.
    pub variance: f64,
}

/// Intensity and noise of the detected port over `phi_grid`.
pub fn fringe_scan(config: &InterferometerConfig, phi_grid: &[f64]) -> Result<Vec<FringePoint>> {
    if phi_grid.is_empty() {
        return Err(Error::invalid("phase grid is empty"));
    }
    let lo = homodyne_response(config, PI)?.lo_phase;
    phi_grid
        .iter()
        .map(|&phi| {
            let s = build_state(config, phi)?;
            Ok(FringePoint {
                phi,
                intensity: s.mean_photon_number(PHASE_MODE)?,
                variance: s.quadrature_variance(PHASE_MODE, lo)?,
            })
        })
        .collect()
}

/// `n` phases evenly spaced over `[0, 2π)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}
