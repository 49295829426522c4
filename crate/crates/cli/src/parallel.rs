//! Rayon front-ends for the ensemble loops of the core crate.
//!
//! Work items are indexed and each index owns its random stream, so the
//! collected rows are identical to the sequential ones. The reductions are
//! then the core's own order-fixed summaries, which makes the results
//! bit-identical for every thread count.

use nvfield_core::constants::NvConstants;
use nvfield_core::electrostatics::{
    field_stats_from_samples, trial_field_with, DielectricConfig, FieldStats, IonCount, SamplingMethod,
};
use nvfield_core::engine::SignalTrace;
use nvfield_core::open_system::{fid_summary, fid_trajectory, hahn_summary, hahn_trajectory, NoiseModel};
use nvfield_core::sequence::PulseSequence;
use nvfield_core::spin::DriveSettings;
use nvfield_core::{Error, Result};
use rayon::prelude::*;

pub fn field_stats_par(
    c: f64,
    cfg: &DielectricConfig,
    trials: usize,
    seed: u64,
    count: IonCount,
    method: SamplingMethod,
) -> Result<FieldStats> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_field_with(c, cfg, seed, t, count, method))
        .collect::<Result<Vec<_>>>()?;
    field_stats_from_samples(&samples)
}

pub fn hahn_ensemble_par(
    noise: &NoiseModel,
    constants: &NvConstants,
    d: &DriveSettings,
    taus: &[f64],
) -> Result<SignalTrace> {
    noise.validate()?;
    let rows = (0..noise.trajectories as u64)
        .into_par_iter()
        .map(|i| hahn_trajectory(noise, constants, d, taus, i))
        .collect::<Result<Vec<_>>>()?;
    hahn_summary(noise, taus, &rows)
}

pub fn fid_ensemble_par(
    seq: &PulseSequence,
    noise: &NoiseModel,
    constants: &NvConstants,
    d: &DriveSettings,
    taus: &[f64],
) -> Result<SignalTrace> {
    noise.validate()?;
    let rows = (0..noise.trajectories as u64)
        .into_par_iter()
        .map(|i| fid_trajectory(seq, noise, constants, d, taus, i))
        .collect::<Result<Vec<_>>>()?;
    fid_summary(noise, taus, &rows)
}
