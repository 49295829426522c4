//! Dephasing and fluctuating-field ensembles.

mod ensemble;
mod lindblad;

pub use ensemble::{
    apply_intrinsic_decay, average_trajectories, fid_ensemble, fid_summary, fid_trajectory, fid_with_dephasing,
    hahn_ensemble, hahn_summary, hahn_trajectory, run_open, sample_field_trajectory, t2_components, ElectricT2,
    FieldPath, FieldTrajectory, NoiseModel,
};
pub use lindblad::{
    evolve, evolve_checkpoints, evolve_segments, generator_scale, lindblad_step, Collapse, DensityMatrix,
    DEFAULT_STEP_FRACTION, HALVING_DRIFT, MAX_STEP_DRIFT,
};
