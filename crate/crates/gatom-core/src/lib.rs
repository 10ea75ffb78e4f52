//! Numerical toolkit for giant atoms coupled to a one-dimensional waveguide.
//!
//! A "giant" atom exchanges energy with the waveguide at several spatially
//! separated coupling points, so emitted field components re-interfere with
//! the atom after finite travel delays. This crate covers the resulting
//! physics at desk scale:
//!
//! - [`emission`]: time-domain integration of the delay differential equation
//!   for the excited-state amplitude, plus reconstruction of the emitted
//!   field profile.
//! - [`spectral`]: poles and residues of the Laplace-transformed amplitude,
//!   the dark-state (bound-state-in-the-continuum) condition, and mode-sum
//!   reconstruction of the dynamics.
//! - [`dfi`]: two braided giant atoms — Lindblad coefficients, the 16x16
//!   vectorized Liouvillian, its spectrum, and the total decay rate.
//! - [`disorder`]: reproducible Gaussian disorder ensembles over coupling
//!   strengths and positions.
//! - [`analysis`]: decay-rate extraction, ensemble statistics, power-law and
//!   extended-Debye fits of rate-versus-disorder curves.
//!
//! Internal units set `v = 1` and the nominal inter-point delay `tau = 1`;
//! all rates are per `tau` and all positions are in units of `v*tau`.

pub mod analysis;
pub mod dfi;
pub mod disorder;
pub mod emission;
mod error;
pub mod spectral;

mod emitter;

pub use emitter::EmitterConfig;
pub use error::{Error, Result};

pub(crate) type C64 = num_complex::Complex<f64>;
