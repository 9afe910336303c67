//! Dither lock of the dark fringe through a piezo actuator.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{build_state, InterferometerConfig, PHASE_MODE};
use crate::error::{Error, Result};

/// Piezo voltage to optical phase, `φ = a₁·v + a₃·v³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorMap {
    pub linear: f64,
    pub cubic: f64,
}

impl ActuatorMap {
    pub fn phase(&self, voltage: f64) -> f64 {
        self.linear * voltage + self.cubic * voltage.powi(3)
    }
}

impl Default for ActuatorMap {
    fn default() -> Self {
        Self {
            linear: 0.5,
            cubic: 0.0,
        }
    }
}

/// Proportional-integral controller acting on a demodulated dither error.
///
/// Gains are in units of 1/s (proportional) and 1/s² (integral); the loop
/// runs once per dither period.
#[derive(Debug, Clone, PartialEq)]
pub struct LockController {
    pub proportional_gain: f64,
    pub integral_gain: f64,
    /// Target phase; `π` is the dark fringe.
    pub setpoint: f64,
    /// Dither amplitude in rad.
    pub dither_amplitude: f64,
    /// Dither frequency in Hz; one controller step per period.
    pub dither_frequency: f64,
    /// Intensity samples per dither period used for demodulation.
    pub samples_per_period: usize,
    pub actuator: ActuatorMap,
    /// |phase error| above this many rad ...
    pub divergence_threshold: f64,
    /// ... for this many consecutive steps is a lock failure.
    pub divergence_steps: usize,
}

impl Default for LockController {
    fn default() -> Self {
        Self {
            proportional_gain: 5.0e3,
            integral_gain: 2.5e6,
            setpoint: PI,
            dither_amplitude: 0.01,
            dither_frequency: 1.0e4,
            samples_per_period: 16,
            actuator: ActuatorMap::default(),
            divergence_threshold: 1.0,
            divergence_steps: 10,
        }
    }
}

impl LockController {
    pub fn step(&self) -> f64 {
        1.0 / self.dither_frequency
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dither_frequency > 0.0) {
            return Err(Error::invalid("dither frequency must be positive"));
        }
        if !(self.dither_amplitude > 0.0 && self.dither_amplitude < 0.5) {
            return Err(Error::invalid("dither amplitude must lie in (0, 0.5) rad"));
        }
        if self.samples_per_period < 4 {
            return Err(Error::invalid("need at least 4 samples per dither period"));
        }
        if self.proportional_gain < 0.0 || self.integral_gain < 0.0 {
            return Err(Error::invalid("controller gains must be non-negative"));
        }
        if self.proportional_gain * self.step() >= 2.0 {
            return Err(Error::invalid(format!(
                "proportional gain × step = {} is not below 2; the loop would be unstable",
                self.proportional_gain * self.step()
            )));
        }
        if self.actuator.linear == 0.0 {
            return Err(Error::invalid("actuator has no linear response"));
        }
        if self.divergence_steps == 0 {
            return Err(Error::invalid("divergence_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Time series of a lock run, one entry per controller step.
#[derive(Debug, Clone, PartialEq)]
pub struct LockTrace {
    pub step: f64,
    pub time: Vec<f64>,
    /// Optical phase minus setpoint, wrapped to (-π, π].
    pub phase_error: Vec<f64>,
    /// Demodulated, normalised error signal.
    pub error_signal: Vec<f64>,
    pub control_voltage: Vec<f64>,
}

impl LockTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn residual_rms(&self, from: usize) -> f64 {
        let tail = &self.phase_error[from.min(self.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        (tail.iter().map(|e| e * e).sum::<f64>() / tail.len() as f64).sqrt()
    }

    pub fn median_abs_error(&self, from: usize) -> f64 {
        let mut tail: Vec<f64> = self.phase_error[from.min(self.len())..]
            .iter()
            .map(|e| e.abs())
            .collect();
        if tail.is_empty() {
            return 0.0;
        }
        tail.sort_by(f64::total_cmp);
        let n = tail.len();
        if n % 2 == 1 {
            tail[n / 2]
        } else {
            0.5 * (tail[n / 2 - 1] + tail[n / 2])
        }
    }

    /// First time after which |phase error| stays below `threshold`.
    pub fn settling_time(&self, threshold: f64) -> Option<f64> {
        let last_above = self.phase_error.iter().rposition(|e| e.abs() >= threshold);
        match last_above {
            None => self.time.first().copied(),
            Some(k) if k + 1 < self.len() => Some(self.time[k + 1]),
            Some(_) => None,
        }
    }
}

fn wrap(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Gaussian random walk with `sigma` rad per square-root step, starting at 0.
pub fn random_walk_disturbance(n_steps: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    Ok((0..n_steps)
        .map(|_| {
            let here = acc;
            acc += normal.sample(&mut rng);
            here
        })
        .collect())
}

/// Lock the interferometer to `controller.setpoint` against `disturbance`
/// (rad, one value per step). The optical phase at step k is
/// `π + d_k + A(v_k)` with the actuator drive `v` starting at 0.
pub fn lock_dark_fringe(
    config: &InterferometerConfig,
    controller: &LockController,
    disturbance: &[f64],
) -> Result<LockTrace> {
    controller.validate()?;
    config.validate()?;
    if disturbance.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            available: 0,
        });
    }

    let intensity = |phi: f64| -> Result<f64> {
        build_state(config, phi)?.mean_photon_number(PHASE_MODE)
    };
    let half_contrast = 0.5 * (intensity(0.0)? - intensity(PI)?);
    if !(half_contrast > 0.0) {
        return Err(Error::invalid("interferometer shows no fringe to lock to"));
    }

    let m = controller.samples_per_period;
    let dither: Vec<f64> = (0..m)
        .map(|j| (2.0 * PI * j as f64 / m as f64).sin())
        .collect();
    let norm = 2.0 / (m as f64 * controller.dither_amplitude * half_contrast);
    let offset = (controller.setpoint - PI).sin();
    let dt = controller.step();
    let slope = controller.actuator.linear;

    let mut trace = LockTrace {
        step: dt,
        time: Vec::with_capacity(disturbance.len()),
        phase_error: Vec::with_capacity(disturbance.len()),
        error_signal: Vec::with_capacity(disturbance.len()),
        control_voltage: Vec::with_capacity(disturbance.len()),
    };
    let mut voltage = 0.0;
    let mut integral = 0.0;
    let mut above = 0usize;

    for (k, &d) in disturbance.iter().enumerate() {
        let phi = PI + d + controller.actuator.phase(voltage);
        let mut demod = 0.0;
        for &s in &dither {
            demod += intensity(phi + controller.dither_amplitude * s)? * s;
        }
        let error = demod * norm - offset;
        let phase_error = wrap(phi - controller.setpoint);

        trace.time.push(k as f64 * dt);
        trace.phase_error.push(phase_error);
        trace.error_signal.push(error);
        trace.control_voltage.push(voltage);

        if phase_error.abs() > controller.divergence_threshold {
            above += 1;
            if above >= controller.divergence_steps {
                return Err(Error::LockFailure {
                    step: k + 1 - above,
                    threshold: controller.divergence_threshold,
                });
            }
        } else {
            above = 0;
        }

        integral += error * dt;
        let rate = controller.proportional_gain * error + controller.integral_gain * integral;
        voltage -= rate * dt / slope;
    }
    Ok(trace)
}
