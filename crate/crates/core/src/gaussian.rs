//! Gaussian phase-space engine.
//!
//! A state on `n` bosonic modes is a mean vector and covariance matrix over
//! the interleaved quadratures `(x₁, p₁, x₂, p₂, …)`. Units are shot-noise
//! units: the vacuum has zero mean and identity covariance.
//!
//! Unitary Gaussian operations act as `mean -> S·mean + d`,
//! `cov -> S·cov·Sᵀ` with `S Ω Sᵀ = Ω`. Loss is not symplectic and is applied
//! through [`GaussianState::apply_loss`].

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Per-entry tolerance on `cov - covᵀ`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Per-entry tolerance on `S Ω Sᵀ - Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Lower bound on the eigenvalues of `cov + iΩ`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// The `(signal, idler)` roles of a two-mode operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModePair {
    signal: usize,
    idler: usize,
}

impl ModePair {
    pub fn new(signal: usize, idler: usize) -> Result<Self> {
        if signal == idler {
            return Err(Error::invalid(format!(
                "mode pair must be distinct, got ({signal}, {idler})"
            )));
        }
        Ok(Self { signal, idler })
    }

    pub fn signal(&self) -> usize {
        self.signal
    }

    pub fn idler(&self) -> usize {
        self.idler
    }

    fn check(&self, n_modes: usize) -> Result<()> {
        check_mode(self.signal, n_modes)?;
        check_mode(self.idler, n_modes)
    }
}

fn check_mode(mode: usize, n_modes: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::invalid(format!(
            "mode {mode} out of range for {n_modes} modes"
        )));
    }
    Ok(())
}

/// Standard symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// What a [`SymplecticOp`] represents.
#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    Identity,
    TwoModeSqueezer { gain: f64, pair: ModePair },
    PhaseShift { phi: f64, mode: usize },
    BeamSplitter { transmissivity: f64, pair: ModePair },
    Displacement { mode: usize, alpha: Complex64 },
    Composite(Vec<OpKind>),
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpKind::Identity => write!(f, "identity"),
            OpKind::TwoModeSqueezer { gain, pair } => {
                write!(f, "squeezer(G={gain}, {}->{})", pair.signal, pair.idler)
            }
            OpKind::PhaseShift { phi, mode } => {
                // reduced for display only
                write!(f, "phase({:.6}, mode {mode})", phi.rem_euclid(TAU))
            }
            OpKind::BeamSplitter {
                transmissivity,
                pair,
            } => write!(f, "splitter(T={transmissivity}, {}-{})", pair.signal, pair.idler),
            OpKind::Displacement { mode, alpha } => write!(f, "displace({alpha}, mode {mode})"),
            OpKind::Composite(parts) => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "[{}]", parts.join(" ; "))
            }
        }
    }
}

/// Affine symplectic map on phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
    kind: OpKind,
}

impl SymplecticOp {
    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: DVector::zeros(2 * n_modes),
            kind: OpKind::Identity,
        }
    }

    /// Parametric amplifier of intensity gain `gain` on `pair`:
    /// `a_s -> √G a_s + √g a_i†`, `a_i -> √G a_i + √g a_s†`, `g = G - 1`.
    pub fn two_mode_squeezer(n_modes: usize, gain: f64, pair: ModePair) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::invalid(format!(
                "parametric gain must be >= 1, got {gain}"
            )));
        }
        pair.check(n_modes)?;
        let c = gain.sqrt();
        let s = (gain - 1.0).sqrt();
        let (a, b) = (2 * pair.signal, 2 * pair.idler);
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        m[(a, a)] = c;
        m[(a + 1, a + 1)] = c;
        m[(b, b)] = c;
        m[(b + 1, b + 1)] = c;
        m[(a, b)] = s;
        m[(a + 1, b + 1)] = -s;
        m[(b, a)] = s;
        m[(b + 1, a + 1)] = -s;
        Ok(Self {
            matrix: m,
            displacement: DVector::zeros(2 * n_modes),
            kind: OpKind::TwoModeSqueezer { gain, pair },
        })
    }

    /// `a -> a·e^{iφ}` on `mode`.
    pub fn phase_shift(n_modes: usize, phi: f64, mode: usize) -> Result<Self> {
        check_mode(mode, n_modes)?;
        let (s, c) = phi.sin_cos();
        let k = 2 * mode;
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        m[(k, k)] = c;
        m[(k, k + 1)] = -s;
        m[(k + 1, k)] = s;
        m[(k + 1, k + 1)] = c;
        Ok(Self {
            matrix: m,
            displacement: DVector::zeros(2 * n_modes),
            kind: OpKind::PhaseShift { phi, mode },
        })
    }

    /// Lossless splitter with `|t|² = transmissivity`:
    /// `a -> t a + r b`, `b -> -r a + t b`.
    pub fn beam_splitter(n_modes: usize, transmissivity: f64, pair: ModePair) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::invalid(format!(
                "transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        pair.check(n_modes)?;
        let t = transmissivity.sqrt();
        let r = (1.0 - transmissivity).sqrt();
        let (a, b) = (2 * pair.signal, 2 * pair.idler);
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for q in 0..2 {
            m[(a + q, a + q)] = t;
            m[(a + q, b + q)] = r;
            m[(b + q, a + q)] = -r;
            m[(b + q, b + q)] = t;
        }
        Ok(Self {
            matrix: m,
            displacement: DVector::zeros(2 * n_modes),
            kind: OpKind::BeamSplitter {
                transmissivity,
                pair,
            },
        })
    }

    /// Coherent displacement `a -> a + α` of one mode.
    pub fn displacement(n_modes: usize, mode: usize, alpha: Complex64) -> Result<Self> {
        check_mode(mode, n_modes)?;
        let mut d = DVector::zeros(2 * n_modes);
        d[2 * mode] = 2.0 * alpha.re;
        d[2 * mode + 1] = 2.0 * alpha.im;
        Ok(Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: d,
            kind: OpKind::Displacement { mode, alpha },
        })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SymplecticOp) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: next.dim(),
            });
        }
        let mut parts = match &self.kind {
            OpKind::Composite(p) => p.clone(),
            k => vec![k.clone()],
        };
        match &next.kind {
            OpKind::Composite(p) => parts.extend(p.iter().cloned()),
            k => parts.push(k.clone()),
        }
        Ok(Self {
            matrix: &next.matrix * &self.matrix,
            displacement: &next.matrix * &self.displacement + &next.displacement,
            kind: OpKind::Composite(parts),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement_vector(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn n_modes(&self) -> usize {
        self.dim() / 2
    }

    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entry of `|S Ω Sᵀ - Ω|`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        let r = &self.matrix * &omega * self.matrix.transpose() - omega;
        r.amax()
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_residual() <= SYMPLECTIC_TOL
    }
}

/// First and second moments of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("a state needs at least one mode"));
        }
        Ok(Self {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Product of coherent states, one amplitude per mode.
    pub fn coherent(amplitudes: &[Complex64]) -> Result<Self> {
        let mut state = Self::vacuum(amplitudes.len())?;
        for (k, a) in amplitudes.iter().enumerate() {
            state.mean[2 * k] = 2.0 * a.re;
            state.mean[2 * k + 1] = 2.0 * a.im;
        }
        Ok(state)
    }

    /// Build from raw moments, checking symmetry and the uncertainty relation.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::invalid(format!("mean length {dim} is not 2·n_modes")));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: cov.nrows(),
            });
        }
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL {
            return Err(Error::invalid("covariance matrix is not symmetric"));
        }
        let state = Self {
            n_modes: dim / 2,
            mean,
            cov,
        };
        let lowest = state.min_uncertainty_eigenvalue();
        if lowest < -PHYSICALITY_TOL {
            return Err(Error::invalid(format!(
                "covariance violates the uncertainty relation (eigenvalue {lowest:.3e})"
            )));
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn apply(&self, op: &SymplecticOp) -> Result<Self> {
        if op.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: op.dim(),
            });
        }
        let s = op.matrix();
        let mut cov = s * &self.cov * s.transpose();
        symmetrize(&mut cov);
        Ok(Self {
            n_modes: self.n_modes,
            mean: s * &self.mean + op.displacement_vector(),
            cov,
        })
    }

    /// Pure attenuation of `mode` with transmission `eta`; the lost fraction
    /// is replaced by vacuum.
    pub fn apply_loss(&self, mode: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid(format!(
                "transmission must lie in [0, 1], got {eta}"
            )));
        }
        check_mode(mode, self.n_modes)?;
        let mut out = self.clone();
        if eta == 1.0 {
            return Ok(out);
        }
        let amp = eta.sqrt();
        let (k0, k1) = (2 * mode, 2 * mode + 1);
        out.mean[k0] *= amp;
        out.mean[k1] *= amp;
        let dim = 2 * self.n_modes;
        for row in [k0, k1] {
            for col in 0..dim {
                if col == k0 || col == k1 {
                    continue;
                }
                out.cov[(row, col)] *= amp;
                out.cov[(col, row)] *= amp;
            }
        }
        for r in [k0, k1] {
            for c in [k0, k1] {
                let vac = if r == c { 1.0 } else { 0.0 };
                out.cov[(r, c)] = eta * self.cov[(r, c)] + (1.0 - eta) * vac;
            }
        }
        Ok(out)
    }

    /// Same loss on every listed mode.
    pub fn apply_loss_all(&self, modes: &[usize], eta: f64) -> Result<Self> {
        modes
            .iter()
            .try_fold(self.clone(), |state, &m| state.apply_loss(m, eta))
    }

    /// `⟨a†a⟩` of one mode.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        check_mode(mode, self.n_modes)?;
        let (k0, k1) = (2 * mode, 2 * mode + 1);
        let coherent = (self.mean[k0].powi(2) + self.mean[k1].powi(2)) / 4.0;
        let noise = (self.cov[(k0, k0)] + self.cov[(k1, k1)] - 2.0) / 4.0;
        Ok(coherent + noise)
    }

    /// Displacement part of `⟨a†a⟩`, `|⟨a⟩|²`.
    pub fn coherent_photon_number(&self, mode: usize) -> Result<f64> {
        check_mode(mode, self.n_modes)?;
        Ok((self.mean[2 * mode].powi(2) + self.mean[2 * mode + 1].powi(2)) / 4.0)
    }

    pub fn total_photon_number(&self) -> f64 {
        (0..self.n_modes)
            .map(|m| self.mean_photon_number(m).unwrap_or(0.0))
            .sum()
    }

    /// `⟨x cos θ + p sin θ⟩`.
    pub fn quadrature_mean(&self, mode: usize, lo_phase: f64) -> Result<f64> {
        check_mode(mode, self.n_modes)?;
        let (s, c) = lo_phase.sin_cos();
        Ok(c * self.mean[2 * mode] + s * self.mean[2 * mode + 1])
    }

    /// Variance of `x cos θ + p sin θ`.
    pub fn quadrature_variance(&self, mode: usize, lo_phase: f64) -> Result<f64> {
        check_mode(mode, self.n_modes)?;
        // double-angle form keeps isotropic states exact at every angle
        let (s2, c2) = (2.0 * lo_phase).sin_cos();
        let (k0, k1) = (2 * mode, 2 * mode + 1);
        let (vxx, vpp, vxp) = (self.cov[(k0, k0)], self.cov[(k1, k1)], self.cov[(k0, k1)]);
        Ok(0.5 * (vxx + vpp) + 0.5 * (vxx - vpp) * c2 + vxp * s2)
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + iΩ`.
    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        let dim = 2 * self.n_modes;
        let omega = symplectic_form(self.n_modes);
        // real embedding [[A, -B], [B, A]] of A + iB carries each eigenvalue twice
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        for r in 0..dim {
            for c in 0..dim {
                embed[(r, c)] = self.cov[(r, c)];
                embed[(r + dim, c + dim)] = self.cov[(r, c)];
                embed[(r, c + dim)] = -omega[(r, c)];
                embed[(r + dim, c)] = omega[(r, c)];
            }
        }
        SymmetricEigen::new(embed).eigenvalues.min()
    }

    pub fn is_physical(&self) -> bool {
        self.min_uncertainty_eigenvalue() >= -PHYSICALITY_TOL
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in (r + 1)..n {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pair() -> ModePair {
        ModePair::new(0, 1).unwrap()
    }

    #[test]
    fn vacuum_moments() {
        let one = GaussianState::vacuum(1).unwrap();
        assert_eq!(one.mean().as_slice(), &[0.0, 0.0]);
        assert_eq!(one.cov(), &DMatrix::identity(2, 2));
        let two = GaussianState::vacuum(2).unwrap();
        assert_eq!(two.mean().len(), 4);
        assert_eq!(two.cov(), &DMatrix::identity(4, 4));
        for m in 0..2 {
            for k in 0..16 {
                let th = k as f64 * 0.4;
                assert_eq!(two.quadrature_variance(m, th).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn vacuum_rejects_zero_modes() {
        assert!(matches!(
            GaussianState::vacuum(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn coherent_convention() {
        let zero = GaussianState::coherent(&[Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(zero, GaussianState::vacuum(1).unwrap());

        let one = GaussianState::coherent(&[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(one.mean().as_slice(), &[2.0, 0.0]);
        assert_eq!(one.mean_photon_number(0).unwrap(), 1.0);

        let big = GaussianState::coherent(&[Complex64::new(3.0, 4.0)]).unwrap();
        assert!((big.mean_photon_number(0).unwrap() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_rejects_empty() {
        assert!(GaussianState::coherent(&[]).is_err());
    }

    #[test]
    fn squeezer_unit_gain_is_identity() {
        let op = SymplecticOp::two_mode_squeezer(2, 1.0, pair()).unwrap();
        assert_eq!(op.matrix(), &DMatrix::identity(4, 4));
    }

    #[test]
    fn squeezer_variance_and_photons() {
        let vac = GaussianState::vacuum(2).unwrap();
        let out = vac
            .apply(&SymplecticOp::two_mode_squeezer(2, 5.0, pair()).unwrap())
            .unwrap();
        for m in 0..2 {
            for k in 0..12 {
                let v = out.quadrature_variance(m, k as f64 * 0.5).unwrap();
                assert!((v - 9.0).abs() < 1e-12);
            }
            assert!((out.mean_photon_number(m).unwrap() - 4.0).abs() < 1e-12);
        }
        let db = 10.0 * out.quadrature_variance(1, 0.0).unwrap().log10();
        assert!((db - 9.542425094393248).abs() < 1e-9);

        let g3 = vac
            .apply(&SymplecticOp::two_mode_squeezer(2, 3.0, pair()).unwrap())
            .unwrap();
        assert!((g3.quadrature_variance(0, 1.1).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn squeezer_rejects_deamplification() {
        assert!(SymplecticOp::two_mode_squeezer(2, 0.9, pair()).is_err());
        assert!(SymplecticOp::two_mode_squeezer(2, f64::NAN, pair()).is_err());
    }

    #[test]
    fn mode_pair_must_be_distinct_and_in_range() {
        assert!(ModePair::new(1, 1).is_err());
        let p = ModePair::new(0, 3).unwrap();
        assert!(SymplecticOp::two_mode_squeezer(2, 2.0, p).is_err());
    }

    #[test]
    fn phase_shift_examples() {
        let id = SymplecticOp::phase_shift(1, 0.0, 0).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(2, 2));
        let full = SymplecticOp::phase_shift(1, 2.0 * PI, 0).unwrap();
        assert!((full.matrix() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);

        let coh = GaussianState::coherent(&[Complex64::new(1.0, 0.0)]).unwrap();
        let rotated = coh
            .apply(&SymplecticOp::phase_shift(1, FRAC_PI_2, 0).unwrap())
            .unwrap();
        assert!(rotated.mean()[0].abs() < 1e-12);
        assert!((rotated.mean()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn beam_splitter_examples() {
        let id = SymplecticOp::beam_splitter(2, 1.0, pair()).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));

        let alpha = Complex64::new(1.3, -0.4);
        let input = GaussianState::coherent(&[alpha, Complex64::new(0.0, 0.0)]).unwrap();
        let half = SymplecticOp::beam_splitter(2, 0.5, pair()).unwrap();
        let split = input.apply(&half).unwrap();
        for m in 0..2 {
            let n = split.mean_photon_number(m).unwrap();
            assert!((n - alpha.norm_sqr() / 2.0).abs() < 1e-12);
        }

        // two 50:50 splitters around a π phase: the input comes back, up to
        // a π phase on the second port
        let pi = SymplecticOp::phase_shift(2, PI, 1).unwrap();
        let mzi = half.then(&pi).unwrap().then(&half).unwrap();
        let mut expected = DMatrix::identity(4, 4);
        expected[(2, 2)] = -1.0;
        expected[(3, 3)] = -1.0;
        assert!((mzi.matrix() - expected).amax() < 1e-12);
        let restored = input.apply(&mzi).unwrap();
        assert!((restored.mean_photon_number(0).unwrap() - alpha.norm_sqr()).abs() < 1e-12);
        assert!(restored.mean_photon_number(1).unwrap().abs() < 1e-12);

        assert!(SymplecticOp::beam_splitter(2, 1.2, pair()).is_err());
        assert!(SymplecticOp::beam_splitter(2, -0.1, pair()).is_err());
    }

    #[test]
    fn apply_identity_is_bit_exact() {
        let s = GaussianState::coherent(&[Complex64::new(0.3, 0.2), Complex64::new(-1.0, 0.5)])
            .unwrap()
            .apply(&SymplecticOp::two_mode_squeezer(2, 1.7, pair()).unwrap())
            .unwrap();
        assert_eq!(s.apply(&SymplecticOp::identity(2)).unwrap(), s);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let s = GaussianState::vacuum(1).unwrap();
        assert!(matches!(
            s.apply(&SymplecticOp::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SymplecticOp::identity(1)
            .then(&SymplecticOp::identity(2))
            .is_err());
    }

    #[test]
    fn composition_matches_sequential_application() {
        let s = GaussianState::coherent(&[Complex64::new(0.7, 0.1), Complex64::new(0.0, 0.0)])
            .unwrap();
        let a = SymplecticOp::two_mode_squeezer(2, 2.5, pair()).unwrap();
        let b = SymplecticOp::phase_shift(2, 0.77, 1).unwrap();
        let seq = s.apply(&a).unwrap().apply(&b).unwrap();
        let comp = s.apply(&a.then(&b).unwrap()).unwrap();
        assert!((seq.mean() - comp.mean()).amax() < 1e-12);
        assert!((seq.cov() - comp.cov()).amax() < 1e-12);
    }

    #[test]
    fn squeezers_compose_by_adding_squeeze_parameters() {
        let (g1, g2) = (2.0_f64, 3.0_f64);
        let r = g1.sqrt().acosh() + g2.sqrt().acosh();
        let combined = r.cosh().powi(2);
        let vac = GaussianState::vacuum(2).unwrap();
        let two = vac
            .apply(&SymplecticOp::two_mode_squeezer(2, g1, pair()).unwrap())
            .unwrap()
            .apply(&SymplecticOp::two_mode_squeezer(2, g2, pair()).unwrap())
            .unwrap();
        let one = vac
            .apply(&SymplecticOp::two_mode_squeezer(2, combined, pair()).unwrap())
            .unwrap();
        assert!((two.cov() - one.cov()).amax() < 1e-9);
    }

    #[test]
    fn loss_examples() {
        let sq = GaussianState::vacuum(2)
            .unwrap()
            .apply(&SymplecticOp::two_mode_squeezer(2, 5.0, pair()).unwrap())
            .unwrap();
        assert_eq!(sq.apply_loss(1, 1.0).unwrap(), sq);

        let dead = sq.apply_loss(1, 0.0).unwrap();
        assert!((dead.quadrature_variance(1, 0.3).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(dead.cov()[(0, 2)], 0.0);

        let lossy = sq.apply_loss(1, 0.4).unwrap();
        let v = lossy.quadrature_variance(1, 0.0).unwrap();
        assert!((v - 4.2).abs() < 1e-12);
        assert!((10.0 * v.log10() - 6.232492903979005).abs() < 1e-9);
        assert!(lossy.is_physical());

        assert!(sq.apply_loss(0, 1.5).is_err());
        assert!(sq.apply_loss(4, 0.5).is_err());
    }

    #[test]
    fn photon_number_examples() {
        assert_eq!(GaussianState::vacuum(1).unwrap().mean_photon_number(0).unwrap(), 0.0);
        let c = GaussianState::coherent(&[Complex64::new(0.6, -2.0)]).unwrap();
        assert!((c.mean_photon_number(0).unwrap() - 4.36).abs() < 1e-12);
        assert!(c.mean_photon_number(1).is_err());
    }

    #[test]
    fn coherent_noise_is_vacuum_noise() {
        let c = GaussianState::coherent(&[Complex64::new(10.0, 0.0)]).unwrap();
        for k in 0..10 {
            assert_eq!(c.quadrature_variance(0, k as f64).unwrap(), 1.0);
        }
    }

    #[test]
    fn from_moments_rejects_unphysical() {
        let mean = DVector::zeros(2);
        let squeezed_too_far = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5]));
        assert!(GaussianState::from_moments(mean.clone(), squeezed_too_far).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(GaussianState::from_moments(mean.clone(), asym).is_err());
        let sq = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 4.0]));
        assert!(GaussianState::from_moments(mean, sq).is_ok());
    }

    #[test]
    fn op_labels_render() {
        let op = SymplecticOp::two_mode_squeezer(2, 5.0, pair())
            .unwrap()
            .then(&SymplecticOp::phase_shift(2, 7.0, 1).unwrap())
            .unwrap();
        let text = op.kind().to_string();
        assert!(text.contains("squeezer(G=5"));
        assert!(text.contains("phase(0.716815"));
    }

    #[derive(Debug, Clone)]
    enum Step {
        Squeeze(f64, bool),
        Phase(f64, usize),
        Split(f64, bool),
        Loss(f64, usize),
    }

    fn step() -> impl Strategy<Value = Step> {
        prop_oneof![
            (1.0..6.0f64, any::<bool>()).prop_map(|(g, f)| Step::Squeeze(g, f)),
            (-7.0..7.0f64, 0..3usize).prop_map(|(p, m)| Step::Phase(p, m)),
            (0.0..=1.0f64, any::<bool>()).prop_map(|(t, f)| Step::Split(t, f)),
            (0.0..=1.0f64, 0..3usize).prop_map(|(e, m)| Step::Loss(e, m)),
        ]
    }

    fn pair_for(flip: bool) -> ModePair {
        if flip {
            ModePair::new(2, 0).unwrap()
        } else {
            ModePair::new(0, 1).unwrap()
        }
    }

    proptest! {
        #[test]
        fn constructors_are_symplectic(g in 1.0..50.0f64, phi in -20.0..20.0f64, t in 0.0..=1.0f64) {
            let p = ModePair::new(0, 2).unwrap();
            prop_assert!(SymplecticOp::two_mode_squeezer(3, g, p).unwrap().is_symplectic());
            prop_assert!(SymplecticOp::phase_shift(3, phi, 1).unwrap().is_symplectic());
            prop_assert!(SymplecticOp::beam_splitter(3, t, p).unwrap().is_symplectic());
        }

        #[test]
        fn random_circuits_stay_physical(steps in prop::collection::vec(step(), 1..10),
                                         re in -2.0..2.0f64, im in -2.0..2.0f64) {
            let mut s = GaussianState::coherent(&[
                Complex64::new(re, im), Complex64::new(0.0, 0.0), Complex64::new(im, re)
            ]).unwrap();
            for st in steps {
                s = match st {
                    Step::Squeeze(g, f) => s.apply(&SymplecticOp::two_mode_squeezer(3, g, pair_for(f)).unwrap()),
                    Step::Phase(p, m) => s.apply(&SymplecticOp::phase_shift(3, p, m).unwrap()),
                    Step::Split(t, f) => s.apply(&SymplecticOp::beam_splitter(3, t, pair_for(f)).unwrap()),
                    Step::Loss(e, m) => s.apply_loss(m, e),
                }.unwrap();
                prop_assert!(s.is_physical(), "eigenvalue {}", s.min_uncertainty_eigenvalue());
                prop_assert!((s.cov() - s.cov().transpose()).amax() <= SYMMETRY_TOL);
            }
        }

        #[test]
        fn passive_ops_preserve_photon_number(t in 0.0..=1.0f64, phi in -7.0..7.0f64,
                                              g in 1.0..4.0f64, re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let s = GaussianState::coherent(&[Complex64::new(re, im), Complex64::new(im, 0.5)])
                .unwrap()
                .apply(&SymplecticOp::two_mode_squeezer(2, g, ModePair::new(0, 1).unwrap()).unwrap())
                .unwrap();
            let before = s.total_photon_number();
            let after = s
                .apply(&SymplecticOp::beam_splitter(2, t, ModePair::new(0, 1).unwrap()).unwrap())
                .unwrap()
                .apply(&SymplecticOp::phase_shift(2, phi, 0).unwrap())
                .unwrap()
                .total_photon_number();
            prop_assert!((after - before).abs() <= 1e-10 * before.max(1.0));
        }

        #[test]
        fn squeezer_on_vacuum_adds_two_g(g in 1.0..30.0f64) {
            let s = GaussianState::vacuum(2)
                .unwrap()
                .apply(&SymplecticOp::two_mode_squeezer(2, g, ModePair::new(0, 1).unwrap()).unwrap())
                .unwrap();
            prop_assert!((s.total_photon_number() - 2.0 * (g - 1.0)).abs() <= 1e-10 * g);
        }
    }
}
