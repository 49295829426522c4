//! Three-sequence reconstruction of the mean field vector.
//!
//! `fid-xi-perp` (at `B_z = 0`) fixes `xi_perp`, `fid-phi-e` then fixes
//! `sin(phi_E)`, and the splitting of the two lines in `fid-xi-z` (at
//! `Delta = 0`) fixes `|xi_z|`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_traits::Float;

use crate::constants::NvConstants;
use crate::engine::{execute, linear_grid, SignalTrace};
use crate::fit::{fit_fid_frequency, fit_phi_e_trace, fit_xi_z_trace};
use crate::open_system::{fid_with_dephasing, NoiseModel};
use crate::sequence::Builtin;
use crate::spectral::spectrum;
use crate::spin::{DriveSettings, NVFrequencies};
use crate::{Error, FieldVector, Result};

/// Measured traces of the three protocol sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTraces {
    pub xi_perp: SignalTrace,
    pub phi_e: SignalTrace,
    pub xi_z: SignalTrace,
}

/// Delay grids of the three sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolGrids {
    pub xi_perp: Vec<f64>,
    pub phi_e: Vec<f64>,
    pub xi_z: Vec<f64>,
}

impl ProtocolGrids {
    /// Eight periods of the `2 xi_perp` line for the first two sequences
    /// (1024 points) and `xi_z_window` seconds for the beat (4096 points).
    pub fn for_scale(xi_perp_expected: f64, xi_z_window: f64) -> Result<Self> {
        if !(xi_perp_expected > 0.0 && xi_perp_expected.is_finite()) {
            return Err(Error::invalid("expected xi_perp must be positive"));
        }
        if !(xi_z_window > 0.0 && xi_z_window.is_finite()) {
            return Err(Error::invalid("xi_z window must be positive"));
        }
        let short = linear_grid(8.0 * core::f64::consts::PI / xi_perp_expected, 1024);
        Ok(Self { xi_perp: short.clone(), phi_e: short, xi_z: linear_grid(xi_z_window, 4096) })
    }
}

/// Axial shift, or the smallest splitting the beat trace could have shown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiZEstimate {
    Resolved(f64),
    Unresolved { resolution_bound: f64 },
}

impl XiZEstimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            XiZEstimate::Resolved(x) => Some(*x),
            XiZEstimate::Unresolved { .. } => None,
        }
    }
}

/// RMS residuals of the three fits (`None` for a fit that was not run).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub xi_perp_rms: Option<f64>,
    pub phi_e_rms: Option<f64>,
    pub xi_z_rms: Option<f64>,
    pub all_converged: bool,
}

/// Recovered spin frequencies and field components.
///
/// `phi_e` is the principal value of `asin(sin phi_E)`; when
/// `phi_e_ambiguous` is set, `pi - phi_e` fits the data equally well, and
/// so does `E_x -> -E_x`. Only `|xi_z|` is observable, so `e_z` is
/// non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub xi_perp: f64,
    pub xi_z: XiZEstimate,
    /// `None` when `E_perp = 0` and the azimuth is undefined.
    pub phi_e: Option<f64>,
    pub phi_e_ambiguous: bool,
    pub e_perp: f64,
    pub e_x: Option<f64>,
    pub e_y: Option<f64>,
    pub e_z: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl ReconstructionResult {
    /// Field vector on the principal branch, when every component is known.
    pub fn field(&self) -> Option<FieldVector> {
        Some(FieldVector::new(self.e_x?, self.e_y?, self.e_z?))
    }
}

/// Below this contrast a trace is treated as carrying no transverse line.
const FLAT_TRACE: f64 = 1e-6;

fn is_flat(trace: &SignalTrace) -> bool {
    let (lo, hi) = trace.signal.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    hi - lo < FLAT_TRACE
}

/// Inverts the protocol traces to frequencies and field components.
pub fn reconstruct_field(traces: &ProtocolTraces, constants: &NvConstants) -> Result<ReconstructionResult> {
    let mut diag = Diagnostics { all_converged: true, ..Default::default() };

    let xi_perp = if is_flat(&traces.xi_perp) {
        0.0
    } else {
        let fit = fit_fid_frequency(&traces.xi_perp)?;
        diag.xi_perp_rms = Some(fit.residual_rms);
        diag.all_converged &= fit.converged;
        fit.get("x").filter(|x| x.is_finite()).ok_or_else(|| Error::fit("no xi_perp line in the fid-xi-perp trace"))?
    };

    let (phi_e, ambiguous) = if xi_perp == 0.0 {
        (None, false)
    } else {
        let fit = fit_phi_e_trace(&traces.phi_e, xi_perp)?;
        diag.phi_e_rms = Some(fit.residual_rms);
        diag.all_converged &= fit.converged;
        let s = fit.get("sin_phi_e").unwrap_or(f64::NAN);
        if !s.is_finite() {
            return Err(Error::fit("azimuth fit failed"));
        }
        let phi = s.clamp(-1.0, 1.0).asin();
        (Some(phi), phi.abs() < FRAC_PI_2)
    };

    let xi_z = if xi_perp == 0.0 {
        // The beat trace reduces to (1 - cos(xi_z tau)) / 2, a Ramsey line at 2 x = xi_z.
        if is_flat(&traces.xi_z) {
            XiZEstimate::Resolved(0.0)
        } else {
            let fit = fit_fid_frequency(&traces.xi_z)?;
            diag.xi_z_rms = Some(fit.residual_rms);
            diag.all_converged &= fit.converged;
            match fit.get("x").filter(|x| x.is_finite()) {
                Some(x) => XiZEstimate::Resolved(2.0 * x),
                None => XiZEstimate::Unresolved {
                    resolution_bound: core::f64::consts::PI * spectrum(&traces.xi_z)?.resolution,
                },
            }
        }
    } else {
        match fit_xi_z_trace(&traces.xi_z, xi_perp) {
            Ok(fit) => {
                diag.xi_z_rms = Some(fit.residual_rms);
                diag.all_converged &= fit.converged;
                XiZEstimate::Resolved(fit.get("xi_z").unwrap_or(f64::NAN))
            }
            Err(Error::Fit(_)) => {
                // Lines (xi_perp +- xi_z) / 2 pi sit xi_z / pi apart.
                let sp = spectrum(&traces.xi_z)?;
                XiZEstimate::Unresolved { resolution_bound: core::f64::consts::PI * sp.resolution }
            }
            Err(e) => return Err(e),
        }
    };

    let (e_perp, _) = constants.field_from_frequencies(xi_perp, 0.0);
    let e_z = xi_z.value().map(|x| constants.field_from_frequencies(0.0, x).1);
    let (e_x, e_y) = match phi_e {
        Some(phi) => (Some(e_perp * phi.cos()), Some(e_perp * phi.sin())),
        None => (Some(0.0), Some(0.0)),
    };
    Ok(ReconstructionResult {
        xi_perp,
        xi_z,
        phi_e,
        phi_e_ambiguous: ambiguous,
        e_perp,
        e_x,
        e_y,
        e_z,
        diagnostics: diag,
    })
}

/// Simulated protocol traces for frequencies `f`; `noise.t2_star` adds
/// Lindblad dephasing, and an infinite value gives unitary traces.
///
/// `f` should have `beta_z = 0` and `Delta = 0`, the operating point of
/// all three sequences.
pub fn measure_protocol(
    f: &NVFrequencies,
    d: &DriveSettings,
    noise: &NoiseModel,
    grids: &ProtocolGrids,
) -> Result<ProtocolTraces> {
    let run = |b: Builtin, taus: &[f64]| -> Result<SignalTrace> {
        let seq = b.sequence();
        let tr = if noise.t2_star.is_finite() {
            fid_with_dephasing(&seq, f, d, noise, taus)?
        } else {
            execute(&seq, f, d, taus)?
        };
        Ok(tr.with_label(b.name()))
    };
    Ok(ProtocolTraces {
        xi_perp: run(Builtin::FidXiPerp, &grids.xi_perp)?,
        phi_e: run(Builtin::FidPhiE, &grids.phi_e)?,
        xi_z: run(Builtin::FidXiZ, &grids.xi_z)?,
    })
}
