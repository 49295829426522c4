use alloc::vec::Vec;

use num_traits::Float;

use crate::spin::{Operator3, StateVector};
use crate::{Error, Result, C64};

/// Largest trace change accepted from a single integration step.
pub const MAX_STEP_DRIFT: f64 = 1e-6;
/// Trace change above which [`evolve`] halves its step.
pub const HALVING_DRIFT: f64 = 1e-8;
/// Default step bound as a fraction of `1 / max|omega|`.
pub const DEFAULT_STEP_FRACTION: f64 = 0.01;

/// Spin-1 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Operator3);

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let mut m = Operator3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = psi.0[i] * psi.0[j].conj();
            }
        }
        Self(m)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level, level)].re
    }

    /// `U rho U^dagger`.
    pub fn transform(&self, u: &Operator3) -> Self {
        Self(*u * self.0 * u.adjoint())
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.0.hermiticity_error()
    }

    /// Smallest eigenvalue of the Hermitian part, by cyclic Jacobi rotations.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut h = (self.0 + self.0.adjoint()).scale(C64::new(0.5, 0.0));
        for _ in 0..12 {
            let off = h[(0, 1)].norm_sqr() + h[(0, 2)].norm_sqr() + h[(1, 2)].norm_sqr();
            let diag = h[(0, 0)].norm_sqr() + h[(1, 1)].norm_sqr() + h[(2, 2)].norm_sqr();
            if off <= 1e-32 * diag || off == 0.0 {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                let apq = h[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (h[(q, q)].re - h[(p, p)].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                let mut j = Operator3::IDENTITY;
                j[(p, p)] = C64::new(c, 0.0);
                j[(q, q)] = C64::new(c, 0.0);
                j[(p, q)] = phase.scale(sn);
                j[(q, p)] = -phase.conj().scale(sn);
                h = j.adjoint() * h * j;
            }
        }
        h[(0, 0)].re.min(h[(1, 1)].re).min(h[(2, 2)].re)
    }
}

/// Collapse operator together with its precomputed `L^dagger L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collapse {
    pub op: Operator3,
    pub op_dag: Operator3,
    pub op_dag_op: Operator3,
}

impl Collapse {
    pub fn new(op: Operator3) -> Self {
        let op_dag = op.adjoint();
        Self { op, op_dag, op_dag_op: op_dag * op }
    }

    /// Pure dephasing `sqrt(rate) S_z`.
    pub fn dephasing(rate: f64) -> Self {
        Self::new(Operator3::s_z().scale(C64::new(rate.sqrt(), 0.0)))
    }
}

fn rhs(rho: &Operator3, h: &Operator3, collapse: &[Collapse]) -> Operator3 {
    let comm = *h * *rho - *rho * *h;
    let mut d = comm.scale(C64::new(0.0, -1.0));
    for c in collapse {
        let jump = c.op * *rho * c.op_dag;
        let anti = c.op_dag_op * *rho + *rho * c.op_dag_op;
        d = d + jump - anti.scale(C64::new(0.5, 0.0));
    }
    d
}

fn rk4(rho: &Operator3, h: &Operator3, collapse: &[Collapse], dt: f64) -> Operator3 {
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = rhs(rho, h, collapse);
    let k2 = rhs(&(*rho + k1.scale(half)), h, collapse);
    let k3 = rhs(&(*rho + k2.scale(half)), h, collapse);
    let k4 = rhs(&(*rho + k3.scale(full)), h, collapse);
    let sum = k1 + k2.scale(C64::new(2.0, 0.0)) + k3.scale(C64::new(2.0, 0.0)) + k4;
    *rho + sum.scale(C64::new(dt / 6.0, 0.0))
}

/// One fourth-order Runge-Kutta step of
/// `d rho/dt = -i [H, rho] + sum_k (L_k rho L_k^dagger - {L_k^dagger L_k, rho} / 2)`.
///
/// Fails with [`Error::StepSize`] if the trace, hermiticity or positivity
/// of the state drifts by more than [`MAX_STEP_DRIFT`].
pub fn lindblad_step(rho: &DensityMatrix, h: &Operator3, collapse: &[Collapse], dt: f64) -> Result<DensityMatrix> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("time step must be positive"));
    }
    let next = DensityMatrix(rk4(&rho.0, h, collapse, dt));
    let drift = step_drift(rho, &next);
    if !(drift <= MAX_STEP_DRIFT) {
        return Err(Error::StepSize { drift });
    }
    Ok(next)
}

/// Departure from a valid state over one step: trace change, loss of
/// hermiticity, and any negative eigenvalue.
fn step_drift(before: &DensityMatrix, after: &DensityMatrix) -> f64 {
    let trace = (after.trace() - before.trace()).abs();
    let negative = (-after.min_eigenvalue()).max(0.0);
    trace.max(after.hermiticity_error()).max(negative)
}

/// Largest rate in the generator: a bound on `max|omega|` of `H` plus the
/// dephasing rates.
pub fn generator_scale(h: &Operator3, collapse: &[Collapse]) -> f64 {
    let mut w = 0.0f64;
    for i in 0..3 {
        let row: f64 = (0..3).map(|j| h[(i, j)].norm()).sum();
        w = w.max(row);
    }
    let rates: f64 = collapse.iter().map(|c| c.op_dag_op.max_abs()).sum();
    w + rates
}

/// Integrates the master equation for a time `t` under a constant `H`.
///
/// Steps are at most `step_fraction / generator_scale` long. A step whose
/// drift exceeds [`HALVING_DRIFT`] is retried at half length.
pub fn evolve(
    rho: &DensityMatrix,
    h: &Operator3,
    collapse: &[Collapse],
    t: f64,
    step_fraction: f64,
) -> Result<DensityMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("evolution time must be finite and non-negative"));
    }
    if t == 0.0 {
        return Ok(*rho);
    }
    let scale = generator_scale(h, collapse);
    let steps = if scale == 0.0 { 1 } else { (t * scale / step_fraction).ceil().max(1.0) as usize };
    let dt = t / steps as f64;
    let mut cur = *rho;
    for _ in 0..steps {
        cur = step_with_halving(&cur, h, collapse, dt)?;
    }
    Ok(cur)
}

fn step_with_halving(rho: &DensityMatrix, h: &Operator3, collapse: &[Collapse], dt: f64) -> Result<DensityMatrix> {
    let next = lindblad_step(rho, h, collapse, dt)?;
    if step_drift(rho, &next) <= HALVING_DRIFT || dt < 1e-18 {
        return Ok(next);
    }
    let mid = step_with_halving(rho, h, collapse, 0.5 * dt)?;
    step_with_halving(&mid, h, collapse, 0.5 * dt)
}

/// Evolves `rho` through a sequence of `(H, duration)` segments.
pub fn evolve_segments(
    rho: &DensityMatrix,
    segments: &[(Operator3, f64)],
    collapse: &[Collapse],
    step_fraction: f64,
) -> Result<DensityMatrix> {
    let mut cur = *rho;
    for (h, t) in segments {
        cur = evolve(&cur, h, collapse, *t, step_fraction)?;
    }
    Ok(cur)
}

/// States of `rho` after each duration in `durations`, applied
/// cumulatively; used by sweeps over increasing delays.
pub fn evolve_checkpoints(
    rho: &DensityMatrix,
    h: &Operator3,
    collapse: &[Collapse],
    durations: &[f64],
    step_fraction: f64,
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(durations.len());
    let mut cur = *rho;
    for &d in durations {
        cur = evolve(&cur, h, collapse, d, step_fraction)?;
        out.push(cur);
    }
    Ok(out)
}
