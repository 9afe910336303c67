//! Truncated number-basis simulator.
//!
//! Independent of the Gaussian engine: states are dense amplitude vectors over
//! `(cutoff + 1)^n_modes` Fock configurations and every operation is the
//! exponential of its generator, evaluated as a Taylor series on the vector in
//! small sub-steps. Used to cross-check [`crate::gaussian`] at low gain.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::ModePair;

/// Default ceiling on the population of the two highest Fock layers.
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-6;

const MAX_DIMENSION: usize = 4_000_000;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Expectation values available from [`FockState::expectation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    PhotonNumber(usize),
    Quadrature { mode: usize, lo_phase: f64 },
    QuadratureVariance { mode: usize, lo_phase: f64 },
}

#[derive(Debug, Clone, Copy)]
enum Generator {
    /// `a†b† - ab`
    Squeeze(ModePair),
    /// `a†b - ab†`
    Split(ModePair),
}

#[derive(Debug, Clone)]
pub struct FockState {
    n_modes: usize,
    cutoff: usize,
    amplitudes: Vec<Complex64>,
    truncation_tolerance: f64,
    /// Probability dropped when renormalising truncated coherent states.
    renormalization_loss: f64,
    /// Largest top-two-layer population observed after any operation.
    peak_top_layer: f64,
}

impl FockState {
    pub fn vacuum(n_modes: usize, cutoff: usize) -> Result<Self> {
        check_shape(n_modes, cutoff)?;
        let mut amplitudes = vec![ZERO; (cutoff + 1).pow(n_modes as u32)];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_modes,
            cutoff,
            amplitudes,
            truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE,
            renormalization_loss: 0.0,
            peak_top_layer: 0.0,
        })
    }

    /// Product of truncated coherent states, renormalised.
    pub fn coherent(alphas: &[Complex64], cutoff: usize) -> Result<Self> {
        let mut state = Self::vacuum(alphas.len(), cutoff)?;
        let dim = cutoff + 1;
        let factors: Vec<Vec<Complex64>> = alphas
            .iter()
            .map(|&a| {
                let mut c = Vec::with_capacity(dim);
                let mut term = Complex64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
                for n in 0..dim {
                    if n > 0 {
                        term = term * a / (n as f64).sqrt();
                    }
                    c.push(term);
                }
                c
            })
            .collect();
        let mut digits = vec![0usize; state.n_modes];
        for (idx, amp) in state.amplitudes.iter_mut().enumerate() {
            state_digits(idx, cutoff, &mut digits);
            *amp = digits
                .iter()
                .zip(&factors)
                .fold(Complex64::new(1.0, 0.0), |acc, (&n, f)| acc * f[n]);
        }
        let norm2: f64 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        state.renormalization_loss = 1.0 - norm2;
        let scale = norm2.sqrt();
        state.amplitudes.iter_mut().for_each(|a| *a /= scale);
        state.check_truncation("coherent state")?;
        Ok(state)
    }

    pub fn with_truncation_tolerance(mut self, tolerance: f64) -> Self {
        self.truncation_tolerance = tolerance;
        self
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn renormalization_loss(&self) -> f64 {
        self.renormalization_loss
    }

    pub fn peak_top_layer(&self) -> f64 {
        self.peak_top_layer
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &FockState) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Population in configurations where some mode holds `cutoff - 1` or
    /// more photons.
    pub fn top_layer_population(&self) -> f64 {
        let mut digits = vec![0usize; self.n_modes];
        let edge = self.cutoff - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                state_digits(*idx, self.cutoff, &mut digits);
                digits.iter().any(|&n| n >= edge)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `exp(r (a_s†a_i† - a_s a_i))` with `cosh r = √G`.
    pub fn apply_squeezer(&self, gain: f64, pair: ModePair) -> Result<Self> {
        let r = squeeze_parameter(gain)?;
        self.evolve(Generator::Squeeze(pair), r, &format!("squeezer G={gain}"))
    }

    /// Inverse of [`FockState::apply_squeezer`] at the same gain.
    pub fn apply_unsqueezer(&self, gain: f64, pair: ModePair) -> Result<Self> {
        let r = squeeze_parameter(gain)?;
        self.evolve(Generator::Squeeze(pair), -r, &format!("unsqueezer G={gain}"))
    }

    /// `a -> t a + r b`, `b -> -r a + t b` with `t² = transmissivity`.
    pub fn apply_beam_splitter(&self, transmissivity: f64, pair: ModePair) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::invalid(format!(
                "transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        let theta = transmissivity.sqrt().acos();
        self.evolve(
            Generator::Split(pair),
            theta,
            &format!("splitter T={transmissivity}"),
        )
    }

    /// `a -> a e^{iφ}`, i.e. `|n⟩ -> e^{iφn}|n⟩`.
    pub fn apply_phase_shift(&self, phi: f64, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        let mut digits = vec![0usize; self.n_modes];
        for (idx, amp) in out.amplitudes.iter_mut().enumerate() {
            state_digits(idx, self.cutoff, &mut digits);
            *amp *= Complex64::from_polar(1.0, phi * digits[mode] as f64);
        }
        Ok(out)
    }

    pub fn expectation(&self, observable: Observable) -> Result<f64> {
        match observable {
            Observable::PhotonNumber(mode) => {
                self.check_mode(mode)?;
                let lowered = self.lower(&self.amplitudes, mode);
                Ok(inner(&lowered, &lowered).re)
            }
            Observable::Quadrature { mode, lo_phase } => {
                self.check_mode(mode)?;
                let a = inner(&self.amplitudes, &self.lower(&self.amplitudes, mode));
                Ok(2.0 * (Complex64::from_polar(1.0, -lo_phase) * a).re)
            }
            Observable::QuadratureVariance { mode, lo_phase } => {
                self.check_mode(mode)?;
                let lowered = self.lower(&self.amplitudes, mode);
                let a = inner(&self.amplitudes, &lowered);
                let aa = inner(&self.amplitudes, &self.lower(&lowered, mode));
                let n = inner(&lowered, &lowered).re;
                let mean = 2.0 * (Complex64::from_polar(1.0, -lo_phase) * a).re;
                let second = 2.0 * (Complex64::from_polar(1.0, -2.0 * lo_phase) * aa).re + 2.0 * n + 1.0;
                Ok(second - mean * mean)
            }
        }
    }

    /// Quadrature means and symmetrised covariance in the same layout as
    /// [`crate::gaussian::GaussianState`].
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n_modes;
        let lowered: Vec<Vec<Complex64>> = (0..n).map(|j| self.lower(&self.amplitudes, j)).collect();
        let first: Vec<Complex64> = lowered.iter().map(|l| inner(&self.amplitudes, l)).collect();
        // ⟨a_j a_k⟩ and ⟨a_j† a_k⟩
        let mut aa = vec![vec![ZERO; n]; n];
        let mut ada = vec![vec![ZERO; n]; n];
        for j in 0..n {
            for k in 0..n {
                aa[j][k] = inner(&self.amplitudes, &self.lower(&lowered[k], j));
                ada[j][k] = inner(&lowered[j], &lowered[k]);
            }
        }
        // ladder vector b = (a_1, a_1†, a_2, a_2†, ...); M_uv = ⟨b_u b_v⟩
        let dim = 2 * n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for j in 0..n {
            for k in 0..n {
                let delta = if j == k { 1.0 } else { 0.0 };
                m[(2 * j, 2 * k)] = aa[j][k];
                m[(2 * j + 1, 2 * k + 1)] = aa[k][j].conj();
                m[(2 * j + 1, 2 * k)] = ada[j][k];
                m[(2 * j, 2 * k + 1)] = ada[k][j] + delta;
            }
        }
        let i = Complex64::new(0.0, 1.0);
        let mut c = DMatrix::<Complex64>::zeros(dim, dim);
        let mut b_mean = DVector::<Complex64>::zeros(dim);
        for j in 0..n {
            c[(2 * j, 2 * j)] = Complex64::new(1.0, 0.0);
            c[(2 * j, 2 * j + 1)] = Complex64::new(1.0, 0.0);
            c[(2 * j + 1, 2 * j)] = -i;
            c[(2 * j + 1, 2 * j + 1)] = i;
            b_mean[2 * j] = first[j];
            b_mean[2 * j + 1] = first[j].conj();
        }
        let mean: DVector<f64> = (&c * &b_mean).map(|z| z.re);
        let second = &c * &m * c.transpose();
        let mut cov = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for s in 0..dim {
                cov[(r, s)] = 0.5 * (second[(r, s)].re + second[(s, r)].re) - mean[r] * mean[s];
            }
        }
        (mean, cov)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::invalid(format!(
                "mode {mode} out of range for {} modes",
                self.n_modes
            )));
        }
        Ok(())
    }

    fn check_truncation(&mut self, context: &str) -> Result<()> {
        let top = self.top_layer_population();
        self.peak_top_layer = self.peak_top_layer.max(top);
        if top > self.truncation_tolerance {
            return Err(Error::TruncationExceeded {
                loss: top,
                tolerance: self.truncation_tolerance,
                context: format!("{context}, cutoff {}", self.cutoff),
            });
        }
        Ok(())
    }

    /// `a_mode ψ`
    fn lower(&self, psi: &[Complex64], mode: usize) -> Vec<Complex64> {
        let stride = (self.cutoff + 1).pow((self.n_modes - 1 - mode) as u32);
        let mut out = vec![ZERO; psi.len()];
        let mut digits = vec![0usize; self.n_modes];
        for (idx, slot) in out.iter_mut().enumerate() {
            state_digits(idx, self.cutoff, &mut digits);
            let n = digits[mode];
            if n < self.cutoff {
                *slot = psi[idx + stride] * ((n + 1) as f64).sqrt();
            }
        }
        out
    }

    fn apply_generator(&self, generator: Generator, psi: &[Complex64], out: &mut [Complex64]) {
        let (pair, squeeze) = match generator {
            Generator::Squeeze(p) => (p, true),
            Generator::Split(p) => (p, false),
        };
        let (a, b) = (pair.signal(), pair.idler());
        let sa = (self.cutoff + 1).pow((self.n_modes - 1 - a) as u32);
        let sb = (self.cutoff + 1).pow((self.n_modes - 1 - b) as u32);
        out.iter_mut().for_each(|o| *o = ZERO);
        let mut digits = vec![0usize; self.n_modes];
        let c = self.cutoff;
        for (idx, &amp) in psi.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            state_digits(idx, c, &mut digits);
            let (na, nb) = (digits[a], digits[b]);
            if squeeze {
                if na < c && nb < c {
                    out[idx + sa + sb] += amp * (((na + 1) * (nb + 1)) as f64).sqrt();
                }
                if na > 0 && nb > 0 {
                    out[idx - sa - sb] -= amp * ((na * nb) as f64).sqrt();
                }
            } else {
                if na < c && nb > 0 {
                    out[idx + sa - sb] += amp * (((na + 1) * nb) as f64).sqrt();
                }
                if na > 0 && nb < c {
                    out[idx - sa + sb] -= amp * ((na * (nb + 1)) as f64).sqrt();
                }
            }
        }
    }

    /// `exp(t·K)ψ` by Taylor series over sub-steps with `|h|·(cutoff+1) <= 1`.
    fn evolve(&self, generator: Generator, t: f64, context: &str) -> Result<Self> {
        let pair = match generator {
            Generator::Squeeze(p) | Generator::Split(p) => p,
        };
        self.check_mode(pair.signal())?;
        self.check_mode(pair.idler())?;
        let mut out = self.clone();
        if t == 0.0 {
            return Ok(out);
        }
        let steps = (t.abs() * (self.cutoff + 1) as f64).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let dim = self.amplitudes.len();
        let mut term = vec![ZERO; dim];
        let mut next = vec![ZERO; dim];
        for _ in 0..steps {
            term.copy_from_slice(&out.amplitudes);
            for k in 1..=80 {
                self.apply_generator(generator, &term, &mut next);
                let scale = h / k as f64;
                let mut size = 0.0;
                for (t_i, n_i) in term.iter_mut().zip(&next) {
                    *t_i = n_i * scale;
                    size += t_i.norm_sqr();
                }
                for (o, t_i) in out.amplitudes.iter_mut().zip(&term) {
                    *o += t_i;
                }
                if size < 1e-34 {
                    break;
                }
            }
        }
        out.check_truncation(context)?;
        Ok(out)
    }
}

fn squeeze_parameter(gain: f64) -> Result<f64> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::invalid(format!(
            "parametric gain must be >= 1, got {gain}"
        )));
    }
    Ok(gain.sqrt().acosh())
}

fn check_shape(n_modes: usize, cutoff: usize) -> Result<()> {
    if n_modes == 0 {
        return Err(Error::invalid("a state needs at least one mode"));
    }
    if cutoff < 2 {
        return Err(Error::invalid(format!("cutoff must be >= 2, got {cutoff}")));
    }
    let dim = (cutoff + 1).checked_pow(n_modes as u32);
    match dim {
        Some(d) if d <= MAX_DIMENSION => Ok(()),
        _ => Err(Error::invalid(format!(
            "{n_modes} modes at cutoff {cutoff} exceed the basis size limit"
        ))),
    }
}

fn state_digits(mut idx: usize, cutoff: usize, digits: &mut [usize]) {
    let base = cutoff + 1;
    for d in digits.iter_mut().rev() {
        *d = idx % base;
        idx /= base;
    }
}

fn inner(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}
