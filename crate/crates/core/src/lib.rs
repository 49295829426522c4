//! Simulation core for sensing electric-field distributions of liquid
//! electrolytes with a single NV center hosted in a nanodiamond.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised along the
//! measurement chain:
//!
//! * [`electrostatics`]: interior field of a dielectric sphere surrounded by
//!   point ions, Monte Carlo statistics of that field and the closed-form
//!   `sigma_E(c)` law with its inverse.
//! * [`spin`]: rotating-frame spin-1 Hamiltonian, its eigensystem and the
//!   closed-form propagators for free evolution and polarized drives.
//! * [`sequence`] and [`engine`]: a small pulse-sequence language, sequence
//!   execution over `tau` sweeps and the analytic reference signals.
//! * [`open_system`]: Lindblad dephasing, fluctuating-field trajectories and
//!   Hahn-echo ensembles.
//! * [`spectral`] and [`fit`]: spectra, peak finding and least-squares fits
//!   of the signal models.
//! * [`reconstruct`]: the three-sequence field reconstruction protocol.
//!
//! All quantities are SI. Frequencies held by the spin modules are angular
//! (rad/s) with `xi = 2*pi*(dipole * field)`; spectra are reported in
//! ordinary Hz.
#![no_std]
// Float methods come from `num_traits` without std but resolve to the
// inherent ones whenever std is in the build graph (tests, or a dependent
// enabling `num-traits/std`), which leaves the trait import unused.
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod electrostatics;
pub mod engine;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod open_system;
pub mod reconstruct;
pub mod rng;
pub mod sequence;
pub mod spectral;
pub mod spin;
pub mod stats;
pub mod vector;

pub use error::{Error, Result};
pub use vector::FieldVector;

/// Complex scalar used by every operator and state.
pub type C64 = num_complex::Complex<f64>;
