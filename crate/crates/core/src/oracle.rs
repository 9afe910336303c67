//! Gaussian-engine versus number-basis comparison over small circuits.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::gaussian::{GaussianState, ModePair, SymplecticOp};

/// Largest gain the number basis can hold at practical cutoffs.
pub const MAX_ORACLE_GAIN: f64 = 2.0;
/// Moment discrepancy above which an oracle run fails.
pub const ORACLE_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Circuit {
    /// Amplifier followed by a phase shift on the idler.
    AmplifierPhase,
    /// Balanced splitter, phase on mode 1, balanced splitter.
    MachZehnder,
    /// Amplifier, phase on the idler, second amplifier of the same gain.
    SuOneOne,
}

impl Circuit {
    pub fn as_str(&self) -> &'static str {
        match self {
            Circuit::AmplifierPhase => "pa_phase",
            Circuit::MachZehnder => "mzi",
            Circuit::SuOneOne => "sui",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub circuit: Circuit,
    pub gain: f64,
    pub alpha: f64,
    pub phi: f64,
    /// Largest absolute difference over means and covariance entries.
    pub discrepancy: f64,
    /// Largest top-layer population seen in the number basis.
    pub truncation: f64,
}

fn pair() -> ModePair {
    ModePair::new(0, 1).expect("distinct modes")
}

/// Run one circuit on both engines. `tolerance` bounds the number-basis
/// truncation.
pub fn compare_circuit(
    circuit: Circuit,
    gain: f64,
    alpha: f64,
    phi: f64,
    cutoff: usize,
    tolerance: f64,
) -> Result<OracleRow> {
    run_circuit(circuit, gain, alpha, phi, cutoff, tolerance).map_err(|e| match e {
        Error::TruncationExceeded {
            loss,
            tolerance,
            context,
        } => Error::TruncationExceeded {
            loss,
            tolerance,
            context: format!(
                "{} circuit G={gain} α={alpha} φ={phi:.4}: {context}",
                circuit.as_str()
            ),
        },
        other => other,
    })
}

fn run_circuit(
    circuit: Circuit,
    gain: f64,
    alpha: f64,
    phi: f64,
    cutoff: usize,
    tolerance: f64,
) -> Result<OracleRow> {
    let seed = [Complex64::new(alpha, 0.0), Complex64::new(0.0, 0.0)];
    let mut g = GaussianState::coherent(&seed)?;
    let mut f = FockState::coherent(&seed, cutoff)?.with_truncation_tolerance(tolerance);
    let phase = SymplecticOp::phase_shift(2, phi, 1)?;
    match circuit {
        Circuit::AmplifierPhase => {
            g = g.apply(&SymplecticOp::two_mode_squeezer(2, gain, pair())?)?.apply(&phase)?;
            f = f.apply_squeezer(gain, pair())?.apply_phase_shift(phi, 1)?;
        }
        Circuit::MachZehnder => {
            let bs = SymplecticOp::beam_splitter(2, 0.5, pair())?;
            g = g.apply(&bs)?.apply(&phase)?.apply(&bs)?;
            f = f
                .apply_beam_splitter(0.5, pair())?
                .apply_phase_shift(phi, 1)?
                .apply_beam_splitter(0.5, pair())?;
        }
        Circuit::SuOneOne => {
            let pa = SymplecticOp::two_mode_squeezer(2, gain, pair())?;
            g = g.apply(&pa)?.apply(&phase)?.apply(&pa)?;
            f = f
                .apply_squeezer(gain, pair())?
                .apply_phase_shift(phi, 1)?
                .apply_squeezer(gain, pair())?;
        }
    }
    let (mean, cov) = f.moments();
    let discrepancy = (&mean - g.mean()).amax().max((&cov - g.cov()).amax());
    Ok(OracleRow {
        circuit,
        gain,
        alpha,
        phi,
        discrepancy,
        truncation: f.peak_top_layer(),
    })
}

/// Amplifier and Mach-Zehnder circuits over gains up to `max_gain`,
/// `α ∈ {0, 0.5}` and eight phases; the SU(1,1) circuit within `π/4` of the
/// dark fringe, where its photon number stays inside the cutoff.
pub fn oracle_suite(max_gain: f64, cutoff: usize, tolerance: f64) -> Result<Vec<OracleRow>> {
    if !(1.0..=MAX_ORACLE_GAIN).contains(&max_gain) {
        return Err(Error::invalid(format!(
            "max_gain must lie in [1, {MAX_ORACLE_GAIN}], got {max_gain}"
        )));
    }
    let mut gains: Vec<f64> = [1.0, 1.25, 1.5, 1.75, 2.0]
        .into_iter()
        .filter(|&g| g < max_gain)
        .collect();
    gains.push(max_gain);
    let phases: Vec<f64> = (0..8).map(|k| 2.0 * PI * k as f64 / 8.0).collect();
    let mut rows = Vec::new();
    for &gain in &gains {
        for alpha in [0.0, 0.5] {
            for &phi in &phases {
                rows.push(compare_circuit(Circuit::AmplifierPhase, gain, alpha, phi, cutoff, tolerance)?);
                if (phi - PI).abs() <= PI / 4.0 + 1e-12 {
                    rows.push(compare_circuit(Circuit::SuOneOne, gain, alpha, phi, cutoff, tolerance)?);
                }
            }
        }
    }
    for alpha in [0.0, 0.5, 1.0] {
        for &phi in &phases {
            rows.push(compare_circuit(Circuit::MachZehnder, 1.0, alpha, phi, cutoff, tolerance)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_TRUNCATION_TOLERANCE;

    #[test]
    fn unit_gain_is_exact() {
        for k in 0..8 {
            let phi = PI * k as f64 / 4.0;
            let r = compare_circuit(Circuit::AmplifierPhase, 1.0, 0.5, phi, 30, DEFAULT_TRUNCATION_TOLERANCE).unwrap();
            assert!(r.discrepancy < 1e-12, "{r:?}");
        }
        let r = compare_circuit(Circuit::SuOneOne, 1.0, 0.0, 0.0, 30, DEFAULT_TRUNCATION_TOLERANCE).unwrap();
        assert!(r.discrepancy < 1e-12);
    }

    #[test]
    fn low_cutoff_overflows() {
        let r = compare_circuit(Circuit::AmplifierPhase, 1.5, 0.5, 0.0, 2, DEFAULT_TRUNCATION_TOLERANCE);
        match r {
            Err(Error::TruncationExceeded { context, .. }) => {
                assert!(context.contains("G=1.5") && context.contains("α=0.5"), "{context}")
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn gain_bound() {
        assert!(oracle_suite(2.5, 30, DEFAULT_TRUNCATION_TOLERANCE).is_err());
        assert!(oracle_suite(0.5, 30, DEFAULT_TRUNCATION_TOLERANCE).is_err());
    }
}
