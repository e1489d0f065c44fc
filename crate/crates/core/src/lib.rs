//! Random-matrix models of fidelity decay and decoherence.
//!
//! - [`ensembles`]: GOE/GUE Hamiltonians and perturbations, spectrum-only ensembles, unfolding.
//! - [`spectral_stats`]: spacing statistics, Wigner surmise, form factor, correlation integrals.
//! - [`fidelity_mc`]: Monte Carlo of the echo operator `M_ε(t) = U₀†(t) U_ε(t)`.
//! - [`fidelity_theory`]: linear response, exponentiated linear response, exact GUE/GOE
//!   fidelity amplitude and the freeze plateau.
//! - [`spectator_purity`]: qubits coupled to a random environment, purity Monte Carlo and
//!   linear-response purity.
//! - [`concurrence_cp`]: concurrence, the Werner curve and CP-plane distances.
//!
//! Units: Monte Carlo engines work with unfolded spectra (unit mean spacing, ħ = 1), so the
//! Heisenberg time is `τ_H = 2π`. The exact fidelity formulas use `τ_H = 1`;
//! [`fidelity_theory::map_epsilon_units`] converts between the two.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Small fixed-size matrix code reads best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod concurrence_cp;
pub mod ensembles;
pub mod error;
pub mod fidelity_mc;
pub mod fidelity_theory;
pub mod linalg;
pub mod parallel;
pub mod quadrature;
pub mod rng;
pub mod spectator_purity;
pub mod spectral_stats;
pub mod stats;

pub use error::{Error, Result};

/// Complex scalar used throughout (same type as `faer::c64`).
pub type C64 = num_complex::Complex64;

/// Heisenberg time of a unit-spacing spectrum with ħ = 1.
pub const TAU_H_UNFOLDED: f64 = 2.0 * std::f64::consts::PI;
