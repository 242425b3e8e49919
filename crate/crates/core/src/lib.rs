//! Numerical tools for one-dimensional ergodic Schrödinger operators
//!
//! ```text
//! [H φ](n) = φ(n+1) + φ(n-1) + V(n) φ(n),      V(n) = f(Tⁿ ω)
//! ```
//!
//! The crate is organized bottom-up:
//!
//! - [`dynamics`]: exact fixed-point rotations, skew-shifts and symbol shifts,
//!   continued fractions and return times.
//! - [`sampling`]: sampling functions `f` with explicit discontinuity data and
//!   the potentials they generate along orbits.
//! - [`cocycle`]: transfer matrices, Lyapunov exponent estimates, energy
//!   sweeps and the thresholded estimate of the set where the exponent vanishes.
//! - [`spectra`]: Dirichlet boxes, Sturm bisection eigenvalues, the integrated
//!   density of states and the Thouless-formula estimate of the exponent.
//! - [`determinism`]: pairs of potentials that agree on a left window but
//!   split at the origin, determinism-defect profiles, and convergence of
//!   translates along return times.

pub mod cocycle;
pub mod determinism;
pub mod dynamics;
mod error;
pub mod sampling;
pub mod spectra;

pub use error::{Error, Result};

/// Largest number of sites any single window or orbit may hold.
pub const MAX_WINDOW_LEN: u64 = 1 << 27;
