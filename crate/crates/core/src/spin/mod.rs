//! Spin-1 ground state of the NV center in the frame rotating with the drive.

mod hamiltonian;
mod operator;
mod propagator;

pub use hamiltonian::{
    build_drive, build_h0, eigensystem, field_to_frequencies, DriveSettings, EigenSystem, NVFrequencies, Polarization,
};
pub use operator::{Operator3, StateVector, MINUS, PLUS, ZERO};
pub use propagator::{drive_propagator, free_propagator, full_pulse_propagator, pulse_durations, pulse_time};
