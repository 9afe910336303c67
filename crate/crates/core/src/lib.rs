//! Phase-space simulation of SU(1,1) (parametric-amplifier) and Mach-Zehnder
//! interferometers.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian`]: Gaussian states, symplectic operations and moments.
//! * [`fock`]: a brute-force truncated number-basis simulator used as an
//!   independent cross-check of the Gaussian engine, driven by [`oracle`].
//! * [`interferometer`]: SU(1,1) and Mach-Zehnder topologies, analytic fringes
//!   and dark-fringe locking.
//! * [`detection`]: homodyne photocurrent synthesis, spectrum-analyzer
//!   emulation and phase calibration.
//! * [`sensitivity`]: minimum detectable phase, bounds and log-log fits.
//! * [`table`]: `#`-commented CSV tables used for every file the crate emits.
//!
//! Quadratures follow `x = a + a†`, `p = -i(a - a†)`, so the vacuum variance
//! is 1 (shot-noise units) and "dB above vacuum" is `10·log10(variance)`.
//! Gains are intensity gains: a parametric amplifier of gain `G` maps
//! `a_s -> √G a_s + √g a_i†` with `g = G - 1`.

pub mod detection;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod interferometer;
pub mod oracle;
pub mod sensitivity;
pub mod table;

pub use error::{Error, Result};
