//! Absolute phase calibration against an electro-optic modulator.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Minimum tone-to-floor distance for a usable reference, in dB.
pub const DETECTION_THRESHOLD_DB: f64 = 3.0103;

/// Reference tone from an EOM driven well below its half-wave voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomReference {
    pub halfwave_voltage: f64,
    pub drive_voltage: f64,
    /// Analyzer reading of the reference tone.
    pub tone_power_db: f64,
    /// Noise floor under the reference tone.
    pub floor_db: f64,
}

impl EomReference {
    /// `π·drive/Vπ`.
    pub fn reference_phase(&self) -> Result<f64> {
        if !(self.halfwave_voltage > 0.0) {
            return Err(Error::invalid("half-wave voltage must be positive"));
        }
        if !(self.drive_voltage > 0.0) {
            return Err(Error::invalid("reference drive must be positive"));
        }
        if self.drive_voltage > 0.1 * self.halfwave_voltage {
            return Err(Error::invalid(format!(
                "reference drive {} V is not small against the half-wave voltage {} V",
                self.drive_voltage, self.halfwave_voltage
            )));
        }
        Ok(PI * self.drive_voltage / self.halfwave_voltage)
    }
}

/// Phase depth whose tone reads `observed_db`, scaling the reference depth
/// by the amplitude ratio `10^((observed - reference)/20)`.
pub fn calibrate_phase(observed_db: f64, reference: &EomReference) -> Result<f64> {
    let delta_ref = reference.reference_phase()?;
    if !(reference.tone_power_db - reference.floor_db >= DETECTION_THRESHOLD_DB) {
        return Err(Error::CalibrationFailure(format!(
            "reference tone {:.2} dB is not {DETECTION_THRESHOLD_DB} dB above the floor {:.2} dB",
            reference.tone_power_db, reference.floor_db
        )));
    }
    if !observed_db.is_finite() {
        return Err(Error::invalid("observed power must be finite"));
    }
    Ok(delta_ref * 10f64.powf((observed_db - reference.tone_power_db) / 20.0))
}

/// Monotone piecewise-linear map from actuator voltage to phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLookup {
    voltages: Vec<f64>,
    phases: Vec<f64>,
}

impl PhaseLookup {
    pub fn new(voltages: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if voltages.len() != phases.len() {
            return Err(Error::DimensionMismatch {
                expected: voltages.len(),
                actual: phases.len(),
            });
        }
        if voltages.len() < 2 {
            return Err(Error::invalid("a lookup needs at least two points"));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&voltages) {
            return Err(Error::invalid("voltages must be strictly increasing"));
        }
        if !increasing(&phases) {
            return Err(Error::invalid("phase must increase strictly with voltage"));
        }
        Ok(Self { voltages, phases })
    }

    /// Calibrate each observed tone against `reference` and tabulate.
    pub fn from_observations(
        voltages: Vec<f64>,
        observed_db: &[f64],
        reference: &EomReference,
    ) -> Result<Self> {
        let phases = observed_db
            .iter()
            .map(|&db| calibrate_phase(db, reference))
            .collect::<Result<Vec<_>>>()?;
        Self::new(voltages, phases)
    }

    pub fn phase_at(&self, voltage: f64) -> Result<f64> {
        interpolate(&self.voltages, &self.phases, voltage)
    }

    pub fn voltage_for(&self, phase: f64) -> Result<f64> {
        interpolate(&self.phases, &self.voltages, phase)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange(format!("{x} is outside the table [{lo}, {hi}]")));
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    Ok(ys[i - 1] + t * (ys[i] - ys[i - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eom() -> EomReference {
        EomReference {
            halfwave_voltage: 200.0,
            drive_voltage: 0.2,
            tone_power_db: 20.0,
            floor_db: 0.0,
        }
    }

    #[test]
    fn reference_phase_from_halfwave() {
        assert!((eom().reference_phase().unwrap() - PI * 1e-3).abs() < 1e-18);
        assert_eq!(calibrate_phase(20.0, &eom()).unwrap(), PI * 1e-3);
    }

    #[test]
    fn six_db_is_half_the_phase() {
        let d = calibrate_phase(20.0 - 20.0 * 2f64.log10(), &eom()).unwrap();
        assert!((d - PI * 1e-3 / 2.0).abs() < 1e-15);
        let d6 = calibrate_phase(14.0, &eom()).unwrap();
        assert!((d6 / (PI * 1e-3 / 2.0) - 1.0).abs() < 3e-3);
    }

    #[test]
    fn undetectable_reference_fails() {
        let weak = EomReference {
            tone_power_db: 2.0,
            ..eom()
        };
        assert!(matches!(calibrate_phase(1.0, &weak), Err(Error::CalibrationFailure(_))));
        let strong = EomReference {
            drive_voltage: 50.0,
            ..eom()
        };
        assert!(calibrate_phase(1.0, &strong).is_err());
    }

    #[test]
    fn lookup_inverts_a_cubic_actuator() {
        let volts: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let phase = |v: f64| 0.3 * v + 0.004 * v.powi(3);
        let db: Vec<f64> = volts
            .iter()
            .map(|&v| 20.0 + 20.0 * (phase(v).max(1e-12) / (PI * 1e-3)).log10())
            .collect();
        let lut = PhaseLookup::from_observations(volts, &db, &eom()).unwrap();
        for v in [0.25, 3.3, 9.9] {
            let p = lut.phase_at(v).unwrap();
            assert!((p - phase(v)).abs() < 0.01 * phase(v) + 1e-3);
            assert!((lut.voltage_for(p).unwrap() - v).abs() < 1e-9);
        }
        assert!(lut.phase_at(11.0).is_err());
        assert!(PhaseLookup::new(vec![0.0, 1.0], vec![1.0, 0.5]).is_err());
    }
}
