//! Sequence execution and the closed-form protocol signals.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::sequence::{FreeDuration, PulseSequence, Step};
use crate::spin::{
    drive_propagator, free_propagator, full_pulse_propagator, pulse_time, DriveSettings, NVFrequencies, Operator3,
    StateVector, ZERO,
};
use crate::{Error, Result};

/// How pulses are propagated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseModel {
    /// Instantaneous pulses that ignore `H0` (`Omega` much larger than all
    /// other frequencies).
    #[default]
    Hard,
    /// Pulses of finite length under `H0 + H_d`.
    Full,
}

/// Readout populations over a `tau` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    /// Delays in seconds.
    pub tau: Vec<f64>,
    pub signal: Vec<f64>,
    /// Standard error of the mean for ensemble averages.
    pub stderr: Option<Vec<f64>>,
    pub label: String,
    pub parameters: Vec<(String, f64)>,
}

impl SignalTrace {
    pub fn new(tau: Vec<f64>, signal: Vec<f64>) -> Result<Self> {
        if tau.len() != signal.len() {
            return Err(Error::invalid("tau and signal lengths differ"));
        }
        Ok(Self { tau, signal, stderr: None, label: String::new(), parameters: Vec::new() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_parameter(mut self, name: impl Into<String>, value: f64) -> Self {
        self.parameters.push((name.into(), value));
        self
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Grid spacing, or [`Error::NonUniformGrid`] if the spacing varies by
    /// more than `1e-6` of its mean.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.tau.len() < 2 {
            return Err(Error::invalid("a trace needs at least two samples"));
        }
        let n = self.tau.len();
        let step = (self.tau[n - 1] - self.tau[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(Error::NonUniformGrid);
        }
        for w in self.tau.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
                return Err(Error::NonUniformGrid);
            }
        }
        Ok(step)
    }
}

/// `n` equally spaced delays from 0 to `tau_max` inclusive.
pub fn linear_grid(tau_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..n).map(|k| tau_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default sweep: 1024 points covering eight periods of `frequency_hz`.
pub fn default_grid(frequency_hz: f64) -> Result<Vec<f64>> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::invalid("grid frequency must be positive"));
    }
    Ok(linear_grid(8.0 / frequency_hz, 1024))
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("delays must be finite and non-negative"));
    }
    Ok(())
}

/// Propagators for every pulse of a sequence, in order.
fn pulse_ops(seq: &PulseSequence, f: &NVFrequencies, d: &DriveSettings, model: PulseModel) -> Result<Vec<Operator3>> {
    let mut ops = Vec::new();
    for s in seq.body() {
        if let Step::Pulse { polarization, angle } = *s {
            let drive = DriveSettings::polarized(d.omega, polarization)?;
            let t = pulse_time(&drive, angle.abs());
            let u = match model {
                PulseModel::Hard => drive_propagator(&drive, t),
                PulseModel::Full => full_pulse_propagator(f, &drive, t),
            };
            // A negative angle is the same rotation run backwards.
            ops.push(if angle < 0.0 { u.adjoint() } else { u });
        }
    }
    Ok(ops)
}

/// State at the end of the sequence body for one `tau`, starting from `|0>`.
pub fn final_state(
    seq: &PulseSequence,
    f: &NVFrequencies,
    d: &DriveSettings,
    tau: f64,
    model: PulseModel,
) -> Result<StateVector> {
    check_taus(&[tau])?;
    let ops = pulse_ops(seq, f, d, model)?;
    Ok(run_static(seq, f, &ops, free_propagator(f, tau), StateVector::basis(ZERO)))
}

fn run_static(
    seq: &PulseSequence,
    f: &NVFrequencies,
    pulses: &[Operator3],
    free_tau: Operator3,
    mut psi: StateVector,
) -> StateVector {
    let mut k = 0;
    for s in seq.body() {
        psi = match s {
            Step::Pulse { .. } => {
                k += 1;
                pulses[k - 1].apply(&psi)
            }
            Step::Free(FreeDuration::Tau) => free_tau.apply(&psi),
            Step::Free(FreeDuration::Fixed(t)) => free_propagator(f, *t).apply(&psi),
            Step::Init | Step::Read(_) => psi,
        };
    }
    psi
}

/// Runs `seq` under static frequencies with hard pulses.
///
/// The polarization of each pulse is set by the sequence; only the Rabi
/// amplitude of `d` is used.
pub fn execute(seq: &PulseSequence, f: &NVFrequencies, d: &DriveSettings, taus: &[f64]) -> Result<SignalTrace> {
    execute_with(seq, f, d, taus, PulseModel::Hard)
}

pub fn execute_with(
    seq: &PulseSequence,
    f: &NVFrequencies,
    d: &DriveSettings,
    taus: &[f64],
    model: PulseModel,
) -> Result<SignalTrace> {
    f.validate()?;
    check_taus(taus)?;
    let ops = pulse_ops(seq, f, d, model)?;
    let level = seq.readout().index();
    let signal = taus
        .iter()
        .map(|&tau| run_static(seq, f, &ops, free_propagator(f, tau), StateVector::basis(ZERO)).population(level))
        .collect();
    Ok(SignalTrace::new(taus.to_vec(), signal)?
        .with_parameter("delta", f.delta)
        .with_parameter("beta_z", f.beta_z)
        .with_parameter("xi_z", f.xi_z)
        .with_parameter("xi_perp", f.xi_perp)
        .with_parameter("phi_e", f.phi_e)
        .with_parameter("omega", d.omega))
}

/// Frequencies that are constant on consecutive intervals of length `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFrequencies {
    pub dt: f64,
    pub segments: Vec<NVFrequencies>,
}

impl PiecewiseFrequencies {
    pub fn duration(&self) -> f64 {
        self.dt * self.segments.len() as f64
    }
}

/// Time-ordered propagator `U(t, 0)` sampled at increasing times.
struct Accumulator<'a> {
    path: &'a PiecewiseFrequencies,
    k: usize,
    start: Operator3,
}

impl Accumulator<'_> {
    fn at(&mut self, t: f64) -> Operator3 {
        let last = self.path.segments.len() - 1;
        while self.k < last && (self.k + 1) as f64 * self.path.dt <= t {
            self.start = free_propagator(&self.path.segments[self.k], self.path.dt) * self.start;
            self.k += 1;
        }
        let local = (t - self.k as f64 * self.path.dt).max(0.0);
        free_propagator(&self.path.segments[self.k], local) * self.start
    }
}

/// Runs `seq` with hard pulses while the frequencies follow `path`.
///
/// Pulses take no time on the path's clock; free evolution steps are laid end
/// to end starting at `t = 0`. Every `U(t, 0)` needed by the whole sweep is
/// recorded in a single pass over the path, and a free step from `t_a` to
/// `t_b` is applied as `U(t_b, 0) U(t_a, 0)^dagger`.
pub fn execute_piecewise(
    seq: &PulseSequence,
    d: &DriveSettings,
    path: &PiecewiseFrequencies,
    taus: &[f64],
) -> Result<Vec<f64>> {
    check_taus(taus)?;
    if path.segments.is_empty() || !(path.dt > 0.0) {
        return Err(Error::invalid("field path must have positive dt and at least one segment"));
    }
    let needed = taus.iter().fold(0.0f64, |m, &t| m.max(seq.free_time(t)));
    if needed > path.duration() * (1.0 + 1e-9) {
        return Err(Error::invalid("field path is shorter than the sequence"));
    }
    let ops = pulse_ops(seq, &NVFrequencies::default(), d, PulseModel::Hard)?;

    // Boundary times of every free step for every tau.
    let mut times: Vec<f64> = Vec::new();
    for &tau in taus {
        let mut t = 0.0;
        times.push(t);
        for s in seq.body() {
            if let Step::Free(dur) = s {
                t += match dur {
                    FreeDuration::Tau => tau,
                    FreeDuration::Fixed(x) => *x,
                };
                times.push(t);
            }
        }
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut acc = Accumulator { path, k: 0, start: Operator3::IDENTITY };
    let mut u = alloc::vec![Operator3::IDENTITY; times.len()];
    let mut prev: Option<(f64, Operator3)> = None;
    for i in order {
        let op = match prev {
            Some((t, op)) if t == times[i] => op,
            _ => acc.at(times[i]),
        };
        u[i] = op;
        prev = Some((times[i], op));
    }

    let per_tau = times.len() / taus.len().max(1);
    let level = seq.readout().index();
    let mut out = Vec::with_capacity(taus.len());
    for j in 0..taus.len() {
        let bounds = &u[j * per_tau..(j + 1) * per_tau];
        let mut psi = StateVector::basis(ZERO);
        let (mut p, mut b) = (0, 0);
        for s in seq.body() {
            match s {
                Step::Pulse { .. } => {
                    psi = ops[p].apply(&psi);
                    p += 1;
                }
                Step::Free(_) => {
                    psi = bounds[b + 1].apply(&bounds[b].adjoint().apply(&psi));
                    b += 1;
                }
                Step::Init | Step::Read(_) => {}
            }
        }
        out.push(psi.population(level));
    }
    Ok(out)
}

/// Right-polarized Ramsey signal `cos^2(tau x) + (beta_z/x)^2 sin^2(tau x)`
/// with `x = sqrt(beta_z^2 + xi_perp^2)`.
pub fn fid_xi_perp_closed(tau: f64, beta_z: f64, xi_perp: f64) -> f64 {
    let x = beta_z.hypot(xi_perp);
    if x == 0.0 {
        return 1.0;
    }
    let (s, c) = (tau * x).sin_cos();
    let r = beta_z / x;
    c * c + r * r * s * s
}

/// `(1 - sin(2 tau xi_perp) sin(phi_E)) / 2`.
pub fn fid_phi_e_closed(tau: f64, xi_perp: f64, phi_e: f64) -> f64 {
    0.5 * (1.0 - (2.0 * tau * xi_perp).sin() * phi_e.sin())
}

/// `(1 - 2 cos(tau xi_perp) cos(tau xi_z) + cos^2(tau xi_perp)) / 4`, valid
/// on resonance (`Delta = 0`) and at `beta_z = 0`.
pub fn fid_xi_z_closed(tau: f64, xi_perp: f64, xi_z: f64) -> f64 {
    let cp = (tau * xi_perp).cos();
    let cz = (tau * xi_z).cos();
    0.25 * (1.0 - 2.0 * cp * cz + cp * cp)
}

/// Echo signal `(1 - cos(2 tau xi_perp))^2 / 4` at `beta_z = 0`.
pub fn hahn_closed(tau: f64, xi_perp: f64) -> f64 {
    let c = (2.0 * tau * xi_perp).cos();
    0.25 * (1.0 - c) * (1.0 - c)
}

/// Two-point azimuth estimate `phi_E = asin(1 - S(pi / (4 xi_perp)) / S(0))`
/// from an `fid-phi-e` trace sampled at both delays.
///
/// Returns the principal value in `[-pi/2, pi/2]`; `phi_E` and `pi - phi_E`
/// give the same trace.
pub fn extract_phi_e(trace: &SignalTrace, xi_perp: f64) -> Result<f64> {
    if !(xi_perp > 0.0 && xi_perp.is_finite()) {
        return Err(Error::domain("extract_phi_e needs xi_perp > 0"));
    }
    let quarter = PI / (4.0 * xi_perp);
    let sample_at = |t: f64| -> Result<f64> {
        let tol = 1e-9 * quarter;
        trace
            .tau
            .iter()
            .position(|&x| (x - t).abs() <= tol)
            .map(|i| trace.signal[i])
            .ok_or_else(|| Error::invalid("trace is not sampled at tau = 0 and tau = pi/(4 xi_perp)"))
    };
    let s0 = sample_at(0.0)?;
    let s1 = sample_at(quarter)?;
    let ratio = s1 / s0;
    if !(0.0..=2.0).contains(&ratio) {
        return Err(Error::InconsistentTrace { ratio });
    }
    Ok((1.0 - ratio).asin())
}
