use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand_distr::{Distribution, Normal};

use super::lindblad::{evolve, Collapse, DensityMatrix, DEFAULT_STEP_FRACTION};
use crate::constants::NvConstants;
use crate::engine::{execute_piecewise, PiecewiseFrequencies, SignalTrace};
use crate::rng::{self, Domain};
use crate::sequence::{Builtin, FreeDuration, PulseSequence, Step};
use crate::spin::{build_h0, drive_propagator, pulse_time, DriveSettings, NVFrequencies, Operator3, StateVector, ZERO};
use crate::stats::column_mean_stderr;
use crate::{Error, FieldVector, Result};

/// Decoherence sources and the fluctuating-field ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Dephasing time of the `sqrt(1/T2*) S_z` Lindblad channel (s);
    /// infinite disables it.
    pub t2_star: f64,
    /// Intrinsic echo coherence time (s); infinite disables it.
    pub t2_int: f64,
    /// Mean of every field component (V/m).
    pub field_mean: f64,
    /// Standard deviation of every field component (V/m).
    pub field_std: f64,
    /// Interval on which the sampled field is held constant (s).
    pub resample_dt: f64,
    pub trajectories: usize,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            t2_star: f64::INFINITY,
            t2_int: 100e-6,
            field_mean: 0.0,
            field_std: 0.0,
            resample_dt: 10e-9,
            trajectories: 1,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.t2_star > 0.0 && self.t2_int > 0.0) {
            return Err(Error::invalid("coherence times must be positive"));
        }
        if !(self.field_std >= 0.0 && self.field_std.is_finite() && self.field_mean.is_finite()) {
            return Err(Error::invalid("field mean must be finite and field std non-negative"));
        }
        if !(self.resample_dt > 0.0 && self.resample_dt.is_finite()) {
            return Err(Error::invalid("resample_dt must be positive"));
        }
        if self.trajectories == 0 {
            return Err(Error::invalid("at least one trajectory is required"));
        }
        Ok(())
    }

    pub fn collapse_ops(&self) -> Vec<Collapse> {
        if self.t2_star.is_finite() {
            vec![Collapse::dephasing(1.0 / self.t2_star)]
        } else {
            Vec::new()
        }
    }
}

/// Field held constant on consecutive intervals of length `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    pub dt: f64,
    pub fields: Vec<FieldVector>,
}

impl FieldTrajectory {
    pub fn duration(&self) -> f64 {
        self.dt * self.fields.len() as f64
    }

    /// Spin frequencies along the path at `B_z = 0` and resonant drive.
    pub fn frequencies(&self, constants: &NvConstants) -> PiecewiseFrequencies {
        let wd = constants.resonant_drive();
        PiecewiseFrequencies {
            dt: self.dt,
            segments: self.fields.iter().map(|&e| constants.frequencies(e, 0.0, wd)).collect(),
        }
    }
}

/// Field path number `index` of the ensemble seeded by `seed`: every
/// component of every interval drawn i.i.d. from `N(E_m, sigma_E^2)`.
pub fn sample_field_trajectory(noise: &NoiseModel, duration: f64, seed: u64, index: u64) -> Result<FieldTrajectory> {
    noise.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration must be finite and non-negative"));
    }
    let n = ((duration / noise.resample_dt).ceil() as usize).max(1);
    let normal =
        Normal::new(noise.field_mean, noise.field_std).map_err(|_| Error::invalid("invalid field distribution"))?;
    let mut rng = rng::stream(seed, Domain::FieldTrajectory, index);
    let fields = (0..n)
        .map(|_| {
            let x = normal.sample(&mut rng);
            let y = normal.sample(&mut rng);
            let z = normal.sample(&mut rng);
            FieldVector::new(x, y, z)
        })
        .collect();
    Ok(FieldTrajectory { dt: noise.resample_dt, fields })
}

/// Echo signal after an extra coherence envelope `e^{-tau/T2_int}`.
///
/// The signal is written as `(1 - g)^2 / 4`, which defines the contrast
/// `g = 1 - 2 sqrt(S)`, and `g` is multiplied by the envelope.
pub fn apply_intrinsic_decay(signal: f64, tau: f64, t2_int: f64) -> f64 {
    let g = (1.0 - 2.0 * signal.max(0.0).sqrt()) * (-tau / t2_int).exp();
    0.25 * (1.0 - g) * (1.0 - g)
}

fn duration_for(seq: &PulseSequence, taus: &[f64]) -> f64 {
    taus.iter().fold(0.0f64, |m, &t| m.max(seq.free_time(t)))
}

/// Echo signal of field trajectory `index` (the ensemble member used by
/// [`hahn_ensemble`]), including the intrinsic envelope.
pub fn hahn_trajectory(
    noise: &NoiseModel,
    constants: &NvConstants,
    d: &DriveSettings,
    taus: &[f64],
    index: u64,
) -> Result<Vec<f64>> {
    let seq = Builtin::Hahn.sequence();
    let path = sample_field_trajectory(noise, duration_for(&seq, taus), noise.seed, index)?;
    let raw = execute_piecewise(&seq, d, &path.frequencies(constants), taus)?;
    Ok(raw
        .iter()
        .zip(taus)
        .map(|(&s, &t)| if noise.t2_int.is_finite() { apply_intrinsic_decay(s, t, noise.t2_int) } else { s })
        .collect())
}

/// Mean and standard error over per-trajectory rows, in row order.
pub fn average_trajectories(taus: &[f64], rows: &[Vec<f64>]) -> Result<SignalTrace> {
    if rows.is_empty() {
        return Err(Error::invalid("no trajectories to average"));
    }
    if rows.iter().any(|r| r.len() != taus.len()) {
        return Err(Error::invalid("trajectory length differs from the tau grid"));
    }
    let (mean, stderr) = column_mean_stderr(rows);
    let mut tr = SignalTrace::new(taus.to_vec(), mean)?;
    tr.stderr = Some(stderr);
    Ok(tr.with_parameter("trajectories", rows.len() as f64))
}

/// Echo signal averaged over `noise.trajectories` field paths.
pub fn hahn_ensemble(
    noise: &NoiseModel,
    constants: &NvConstants,
    d: &DriveSettings,
    taus: &[f64],
) -> Result<SignalTrace> {
    noise.validate()?;
    let rows = (0..noise.trajectories as u64)
        .map(|i| hahn_trajectory(noise, constants, d, taus, i))
        .collect::<Result<Vec<_>>>()?;
    hahn_summary(noise, taus, &rows)
}

/// Averaged echo trace from per-trajectory rows given in index order.
pub fn hahn_summary(noise: &NoiseModel, taus: &[f64], rows: &[Vec<f64>]) -> Result<SignalTrace> {
    Ok(average_trajectories(taus, rows)?
        .with_label("hahn")
        .with_parameter("E_m", noise.field_mean)
        .with_parameter("sigma_E", noise.field_std)
        .with_parameter("resample_dt", noise.resample_dt)
        .with_parameter("T2_int", noise.t2_int))
}

/// Frequencies seen by the spin during free evolution.
#[derive(Debug, Clone, Copy)]
pub enum FieldPath<'a> {
    Static(NVFrequencies),
    Piecewise(&'a PiecewiseFrequencies),
}

impl FieldPath<'_> {
    /// Evolves `rho` from path time `a` to `b`.
    fn advance(&self, rho: &DensityMatrix, a: f64, b: f64, collapse: &[Collapse]) -> Result<DensityMatrix> {
        match self {
            FieldPath::Static(f) => evolve(rho, &build_h0(f), collapse, b - a, DEFAULT_STEP_FRACTION),
            FieldPath::Piecewise(p) => {
                if b > p.duration() * (1.0 + 1e-9) {
                    return Err(Error::invalid("field path is shorter than the sequence"));
                }
                let last = p.segments.len() - 1;
                let mut cur = *rho;
                let mut t = a;
                while t < b {
                    let k = ((t / p.dt).floor() as usize).min(last);
                    let end = if k == last { b } else { b.min((k + 1) as f64 * p.dt) };
                    // Guard against t sitting a rounding error below a boundary.
                    let end = if end <= t { b.min((k + 2) as f64 * p.dt) } else { end };
                    cur = evolve(&cur, &build_h0(&p.segments[k]), collapse, end - t, DEFAULT_STEP_FRACTION)?;
                    t = end;
                }
                Ok(cur)
            }
        }
    }
}

fn pulse_op(d: &DriveSettings, s: &Step) -> Result<Option<Operator3>> {
    if let Step::Pulse { polarization, angle } = *s {
        let drive = DriveSettings::polarized(d.omega, polarization)?;
        let u = drive_propagator(&drive, pulse_time(&drive, angle.abs()));
        return Ok(Some(if angle < 0.0 { u.adjoint() } else { u }));
    }
    Ok(None)
}

/// Applies `steps` starting at path time `t`; returns the state and end time.
fn run_steps(
    steps: &[Step],
    d: &DriveSettings,
    path: &FieldPath<'_>,
    collapse: &[Collapse],
    mut rho: DensityMatrix,
    mut t: f64,
    tau: f64,
) -> Result<(DensityMatrix, f64)> {
    for s in steps {
        if let Some(u) = pulse_op(d, s)? {
            rho = rho.transform(&u);
        } else if let Step::Free(dur) = s {
            let len = match dur {
                FreeDuration::Tau => tau,
                FreeDuration::Fixed(x) => *x,
            };
            rho = path.advance(&rho, t, t + len, collapse)?;
            t += len;
        }
    }
    Ok((rho, t))
}

/// Runs `seq` with hard unitary pulses and Lindblad free evolution.
///
/// With a single swept delay the state is carried forward from one delay to
/// the next, so the cost is that of one evolution to the largest delay.
pub fn run_open(
    seq: &PulseSequence,
    d: &DriveSettings,
    path: FieldPath<'_>,
    collapse: &[Collapse],
    taus: &[f64],
) -> Result<Vec<f64>> {
    if taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("delays must be finite and non-negative"));
    }
    let level = seq.readout().index();
    let rho0 = DensityMatrix::from_pure(&StateVector::basis(ZERO));
    let body = seq.body();
    let swept: Vec<usize> = (0..body.len()).filter(|&i| body[i] == Step::Free(FreeDuration::Tau)).collect();
    if swept.len() != 1 {
        return taus
            .iter()
            .map(|&tau| Ok(run_steps(body, d, &path, collapse, rho0, 0.0, tau)?.0.population(level)))
            .collect();
    }
    let (prefix, rest) = body.split_at(swept[0]);
    let suffix = &rest[1..];
    let (mut rho, t0) = run_steps(prefix, d, &path, collapse, rho0, 0.0, 0.0)?;
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let mut out = vec![0.0; taus.len()];
    let mut t = t0;
    for i in order {
        let target = t0 + taus[i];
        rho = path.advance(&rho, t, target, collapse)?;
        t = target;
        let (fin, _) = run_steps(suffix, d, &path, collapse, rho, t, taus[i])?;
        out[i] = fin.population(level);
    }
    Ok(out)
}

/// Sequence signal with `sqrt(1/T2*) S_z` dephasing during free evolution
/// under static frequencies.
pub fn fid_with_dephasing(
    seq: &PulseSequence,
    f: &NVFrequencies,
    d: &DriveSettings,
    noise: &NoiseModel,
    taus: &[f64],
) -> Result<SignalTrace> {
    f.validate()?;
    if !(noise.t2_star > 0.0) {
        return Err(Error::invalid("T2* must be positive"));
    }
    let sig = run_open(seq, d, FieldPath::Static(*f), &noise.collapse_ops(), taus)?;
    Ok(SignalTrace::new(taus.to_vec(), sig)?.with_parameter("T2_star", noise.t2_star))
}

/// Dephased sequence signal along field trajectory `index`.
pub fn fid_trajectory(
    seq: &PulseSequence,
    noise: &NoiseModel,
    constants: &NvConstants,
    d: &DriveSettings,
    taus: &[f64],
    index: u64,
) -> Result<Vec<f64>> {
    let path = sample_field_trajectory(noise, duration_for(seq, taus), noise.seed, index)?;
    let freqs = path.frequencies(constants);
    run_open(seq, d, FieldPath::Piecewise(&freqs), &noise.collapse_ops(), taus)
}

/// Dephased sequence signal averaged over fluctuating-field trajectories.
pub fn fid_ensemble(
    seq: &PulseSequence,
    noise: &NoiseModel,
    constants: &NvConstants,
    d: &DriveSettings,
    taus: &[f64],
) -> Result<SignalTrace> {
    noise.validate()?;
    let rows = (0..noise.trajectories as u64)
        .map(|i| fid_trajectory(seq, noise, constants, d, taus, i))
        .collect::<Result<Vec<_>>>()?;
    fid_summary(noise, taus, &rows)
}

/// Averaged dephased trace from per-trajectory rows given in index order.
pub fn fid_summary(noise: &NoiseModel, taus: &[f64], rows: &[Vec<f64>]) -> Result<SignalTrace> {
    Ok(average_trajectories(taus, rows)?
        .with_parameter("T2_star", noise.t2_star)
        .with_parameter("E_m", noise.field_mean)
        .with_parameter("sigma_E", noise.field_std))
}

/// Electric part of the echo coherence time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectricT2 {
    Finite(f64),
    /// The measured time is not shorter than the intrinsic one.
    NoElectricContribution,
}

/// Splits `1/T2 = 1/T2_int + 1/T2_E` for `T2_E`.
pub fn t2_components(t2_total: f64, t2_int: f64) -> Result<ElectricT2> {
    if !(t2_total > 0.0 && t2_int > 0.0) {
        return Err(Error::invalid("coherence times must be positive"));
    }
    if t2_total >= t2_int {
        return Ok(ElectricT2::NoElectricContribution);
    }
    Ok(ElectricT2::Finite(1.0 / (1.0 / t2_total - 1.0 / t2_int)))
}
