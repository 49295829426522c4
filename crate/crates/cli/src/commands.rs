//! The experiments behind each subcommand.
//!
//! Every command writes its artifacts into the output directory and returns
//! a JSON summary for stdout. Commands whose result is incomplete write what
//! they have and then fail with [`CliError::Incomplete`].

use log::{info, warn};
use nvfield_core::constants::units::{MHZ, MOL_PER_L, NS, US, V_PER_UM};
use nvfield_core::constants::TWO_PI;
use nvfield_core::electrostatics::{coefficient_a, fit_sqrt_law};
use nvfield_core::engine::{execute_with, SignalTrace};
use nvfield_core::fit::{fit_alpha, fit_hahn_decay, FitResult};
use nvfield_core::open_system::{fid_with_dephasing, t2_components, ElectricT2, NoiseModel};
use nvfield_core::reconstruct::{
    measure_protocol, reconstruct_field, ProtocolGrids, ReconstructionResult, XiZEstimate,
};
use nvfield_core::sequence::Builtin;
use nvfield_core::spectral::{find_peaks, resolvable, spectrum_with, Spectrum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{FitReport, OutputDir};
use crate::parallel::{fid_ensemble_par, field_stats_par, hahn_ensemble_par};
use crate::svg::{Chart, Series};

/// Transverse coupling assumed for the protocol grids when the configured
/// field has no transverse part.
const FALLBACK_XI_PERP: f64 = TWO_PI * 1e6;

fn trace_points(tr: &SignalTrace) -> Vec<(f64, f64)> {
    tr.tau.iter().zip(&tr.signal).map(|(t, s)| (t / US, *s)).collect()
}

fn trace_chart(title: &str, tr: &SignalTrace) -> Chart {
    Chart::new(title, "tau (us)", "population").with(Series::line("signal", trace_points(tr)))
}

fn spectrum_chart(title: &str, s: &Spectrum) -> Chart {
    let pts = s.freqs.iter().zip(&s.amplitude).map(|(f, a)| (f / MHZ, *a)).collect();
    Chart::new(title, "frequency (MHz)", "amplitude").with(Series::line("|FFT|", pts))
}

pub fn field_stats(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let diel = cfg.dielectric()?;
    let cs = cfg.concentrations()?;
    let trials = cfg.trials()?;
    let mut rows = Vec::with_capacity(cs.len());
    for &c in &cs {
        let s = field_stats_par(c, &diel, trials, cfg.seed, cfg.ion_count(), cfg.sampling())?;
        info!("c = {} mol/L: sigma = {:?} V/m", c / MOL_PER_L, s.std.to_array());
        rows.push((c, s.std.to_array()));
    }
    out.field_stats("field_stats.csv", &rows)?;

    let usable = trials > 1;
    if !usable {
        warn!("a single trial gives no spread; sigma is reported as 0 and the fit is skipped");
    }
    let points: Vec<(f64, f64)> = rows.iter().flat_map(|(c, s)| s.iter().map(move |v| (*c, *v))).collect();
    let theory = coefficient_a(&diel);
    let fit = if usable && cs.len() > 1 { Some(fit_sqrt_law(&points, &diel)?) } else { None };
    let k = diel.radial_factor();

    let mut chart = Chart::new("field spread", "c (mol/L)", "sigma_E (V/um)");
    for (i, axis) in ["x", "y", "z"].iter().enumerate() {
        let pts = rows.iter().map(|(c, s)| (c / MOL_PER_L, s[i] / V_PER_UM)).collect();
        chart = chart.with(Series::markers(format!("sigma_E{axis}"), pts));
    }
    let c_max = cs.iter().cloned().fold(0.0, f64::max);
    let curve = |a: f64| {
        (0..=64).map(|i| c_max * i as f64 / 64.0).map(|c| (c / MOL_PER_L, a * (c * k).sqrt() / V_PER_UM)).collect()
    };
    chart = chart.with(Series::line("closed form", curve(theory)));
    if let Some(f) = fit {
        chart = chart.with(Series::line("fit", curve(f.a)));
    }
    out.text("field_stats.svg", &chart.render())?;

    let report = json!({
        "trials": trials,
        "usable_statistics": usable,
        "A_fit": fit.map(|f| f.a),
        "A_fit_stderr": fit.map(|f| f.stderr),
        "A_theory": theory,
        "A_ratio": fit.map(|f| f.a / theory),
    });
    out.json("field_stats.json", &report)?;
    Ok(report)
}

/// The trace the `fid` and `spectrum` commands work on.
fn run_trace(
    cfg: &RunConfig,
    fallback: Builtin,
) -> Result<(SignalTrace, Option<Builtin>, nvfield_core::spin::NVFrequencies)> {
    let (seq, builtin) = cfg.sequence(fallback)?;
    let d = cfg.drive()?;
    let f = cfg.frequencies()?;
    let taus = cfg.taus(&f, builtin)?;
    let noise = cfg.noise()?;
    let trace = if cfg.noise.fid_ensemble {
        fid_ensemble_par(&seq, &noise, &cfg.constants()?, &d, &taus)?
    } else if noise.t2_star.is_finite() {
        fid_with_dephasing(&seq, &f, &d, &noise, &taus)?
    } else {
        execute_with(&seq, &f, &d, &taus, cfg.pulse_model())?
    };
    let label = builtin.map_or("custom", |b| b.name());
    Ok((trace.with_label(label), builtin, f))
}

pub fn fid(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let (trace, _, _) = run_trace(cfg, Builtin::FidXiPerp)?;
    out.trace("fid.csv", &trace)?;
    out.text("fid.svg", &trace_chart(&trace.label, &trace).render())?;
    let tail = &trace.signal[trace.len() * 4 / 5..];
    Ok(json!({
        "sequence": trace.label,
        "points": trace.len(),
        "tau_max_us": trace.tau.last().copied().unwrap_or(0.0) / US,
        "tail_mean": tail.iter().sum::<f64>() / tail.len().max(1) as f64,
    }))
}

#[derive(Serialize)]
struct PeakRow {
    freq_mhz: f64,
    amplitude: f64,
    prominence: f64,
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let (trace, builtin, f) = run_trace(cfg, Builtin::FidXiZ)?;
    let s = spectrum_with(&trace, cfg.spectrum_options()?)?;
    out.trace("spectrum_trace.csv", &trace)?;
    out.spectrum("spectrum.csv", &s)?;
    out.text("spectrum.svg", &spectrum_chart(&trace.label, &s).render())?;

    let max = s.amplitude.iter().cloned().fold(0.0, f64::max);
    let peaks: Vec<PeakRow> = find_peaks(&s, cfg.spectrum.min_prominence * max)
        .iter()
        .map(|p| PeakRow { freq_mhz: p.freq / MHZ, amplitude: p.amplitude, prominence: p.prominence })
        .collect();
    // The beat sequence should split its line into xi_perp +- xi_z.
    let doublet = match builtin {
        Some(Builtin::FidXiZ) if f.xi_z != 0.0 && f.xi_perp > f.xi_z.abs() => {
            let (lo, hi) = ((f.xi_perp - f.xi_z.abs()) / TWO_PI, (f.xi_perp + f.xi_z.abs()) / TWO_PI);
            Some((lo, hi, resolvable(&s, lo, hi)?))
        }
        _ => None,
    };
    let report = json!({
        "sequence": trace.label,
        "resolution_MHz": s.resolution / MHZ,
        "bin_MHz": s.bin / MHZ,
        "peaks": peaks.iter().map(|p| json!({"freq_MHz": p.freq_mhz, "amplitude": p.amplitude, "prominence": p.prominence})).collect::<Vec<_>>(),
        "doublet": doublet.map(|(lo, hi, ok)| json!({"expected_MHz": [lo / MHZ, hi / MHZ], "resolvable": ok})),
    });
    out.json("peaks.json", &report)?;
    if let Some((lo, hi, false)) = doublet {
        return Err(CliError::Incomplete(format!(
            "lines at {:.4} and {:.4} MHz are not resolvable in a {:.4} MHz resolution spectrum",
            lo / MHZ,
            hi / MHZ,
            s.resolution / MHZ
        )));
    }
    Ok(report)
}

struct EchoRun {
    trace: SignalTrace,
    fit: FitResult,
    t2_e: ElectricT2,
}

fn echo_run(cfg: &RunConfig, noise: &NoiseModel) -> Result<EchoRun> {
    let taus = cfg.echo_taus()?;
    let trace = hahn_ensemble_par(noise, &cfg.constants()?, &cfg.drive()?, &taus)?;
    let fit = fit_hahn_decay(&trace)?;
    let t2 = fit.get("T2").unwrap_or(f64::NAN);
    let t2_e =
        if fit.converged && t2 > 0.0 { t2_components(t2, noise.t2_int)? } else { ElectricT2::NoElectricContribution };
    Ok(EchoRun { trace, fit, t2_e })
}

fn t2_e_us(t: ElectricT2) -> Option<f64> {
    match t {
        ElectricT2::Finite(v) => Some(v / US),
        ElectricT2::NoElectricContribution => None,
    }
}

pub fn hahn(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let noise = cfg.noise()?;
    let run = echo_run(cfg, &noise)?;
    out.trace("hahn.csv", &run.trace)?;
    out.json("hahn_fit.json", &FitReport::from(&run.fit))?;
    let t2 = run.fit.get("T2").unwrap_or(f64::NAN);
    let xi = run.fit.get("xi_perp").unwrap_or(f64::NAN);
    let model: Vec<(f64, f64)> =
        run.trace.tau.iter().map(|&t| (t / US, nvfield_core::fit::hahn_decay_model(t, xi, t2))).collect();
    let chart = trace_chart("hahn echo", &run.trace).with(Series::line("fit", model));
    out.text("hahn.svg", &chart.render())?;
    let report = json!({
        "trajectories": noise.trajectories,
        "T2_us": t2 / US,
        "T2_stderr_us": run.fit.stderr_of("T2").unwrap_or(f64::NAN) / US,
        "T2_E_us": t2_e_us(run.t2_e),
        "converged": run.fit.converged,
        "message": run.fit.message,
    });
    if !run.fit.converged {
        return Err(CliError::Incomplete("echo decay fit did not converge".into()));
    }
    Ok(report)
}

fn reconstruction_json(r: &ReconstructionResult) -> Value {
    let (xi_z, bound) = match r.xi_z {
        XiZEstimate::Resolved(v) => (Some(v), None),
        XiZEstimate::Unresolved { resolution_bound } => (None, Some(resolution_bound)),
    };
    let vpum = |v: Option<f64>| v.map(|v| v / V_PER_UM);
    json!({
        "xi_perp_rad_per_s": r.xi_perp,
        "xi_z_rad_per_s": xi_z,
        "xi_z_resolution_bound_rad_per_s": bound,
        "phi_e_rad": r.phi_e,
        "phi_e_ambiguous": r.phi_e_ambiguous,
        "E_perp_V_per_um": r.e_perp / V_PER_UM,
        "E_x_V_per_um": vpum(r.e_x),
        "E_y_V_per_um": vpum(r.e_y),
        "E_z_V_per_um": vpum(r.e_z),
        "diagnostics": {
            "xi_perp_rms": r.diagnostics.xi_perp_rms,
            "phi_e_rms": r.diagnostics.phi_e_rms,
            "xi_z_rms": r.diagnostics.xi_z_rms,
            "all_converged": r.diagnostics.all_converged,
        },
    })
}

pub fn reconstruct(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let f = cfg.frequencies()?;
    let scale = if f.xi_perp > 0.0 { f.xi_perp } else { FALLBACK_XI_PERP };
    let grids = ProtocolGrids::for_scale(scale, cfg.xi_z_window()?)?;
    let traces = measure_protocol(&f, &cfg.drive()?, &cfg.noise()?, &grids)?;
    out.trace("protocol_fid_xi_perp.csv", &traces.xi_perp)?;
    out.trace("protocol_fid_phi_e.csv", &traces.phi_e)?;
    out.trace("protocol_fid_xi_z.csv", &traces.xi_z)?;
    let result = reconstruct_field(&traces, &cfg.constants()?)?;
    let report = reconstruction_json(&result);
    out.json("reconstruct.json", &report)?;
    if let XiZEstimate::Unresolved { resolution_bound } = result.xi_z {
        return Err(CliError::Incomplete(format!(
            "xi_z is below the resolution of the beat trace (|xi_z| < {resolution_bound:.4e} rad/s); E_z unknown"
        )));
    }
    Ok(report)
}

pub fn fit_alpha_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let base = cfg.noise()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (e_m, sigma) in cfg.alpha_grid()? {
        let noise = NoiseModel { field_mean: e_m, field_std: sigma, ..base };
        let run = echo_run(cfg, &noise)?;
        let t2 = run.fit.get("T2").unwrap_or(f64::NAN);
        let t2_e = t2_e_us(run.t2_e);
        info!(
            "E_m = {} V/um, sigma = {} V/um: T2 = {} us, T2_E = {:?} us",
            e_m / V_PER_UM,
            sigma / V_PER_UM,
            t2 / US,
            t2_e
        );
        if let Some(t) = t2_e {
            points.push((e_m, sigma, t * US));
        }
        rows.push(vec![e_m / V_PER_UM, sigma / V_PER_UM, t2 / US, t2_e.unwrap_or(f64::NAN)]);
    }
    out.csv("alpha_points.csv", &["E_m_V_per_um", "sigma_E_V_per_um", "T2_us", "T2_E_us"], rows.iter().cloned())?;
    let skipped = rows.len() - points.len();
    if points.len() < 3 {
        return Err(CliError::Incomplete(format!(
            "only {} grid points show an electric T2 contribution",
            points.len()
        )));
    }
    let fit = fit_alpha(&points)?;
    let alpha = fit.get("alpha").unwrap_or(f64::NAN);
    let mut report = serde_json::to_value(FitReport::from(&fit))?;
    report["r_squared"] = json!(fit.r_squared);
    report["skipped_points"] = json!(skipped);
    out.json("alpha_fit.json", &report)?;

    let x = |e: f64, s: f64| e / (s * s) / 1e6;
    let data = points.iter().map(|&(e, s, t)| (x(e, s), t / US)).collect();
    let x_max = points.iter().map(|&(e, s, _)| x(e, s)).fold(0.0, f64::max);
    let line = vec![(0.0, 0.0), (x_max, alpha * x_max * 1e6 / US)];
    let chart = Chart::new("T2_E scaling", "E_m / sigma_E^2 (um/MV)", "T2_E (us)")
        .with(Series::markers("ensemble", data))
        .with(Series::line("alpha E_m / sigma_E^2", line));
    out.text("alpha.svg", &chart.render())?;
    Ok(report)
}

pub fn dt_sweep(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let base = cfg.noise()?;
    let mut rows = Vec::new();
    for dt in cfg.dt_grid()? {
        let run = echo_run(cfg, &NoiseModel { resample_dt: dt, ..base })?;
        let t2 = run.fit.get("T2").unwrap_or(f64::NAN);
        let err = run.fit.stderr_of("T2").unwrap_or(f64::NAN);
        info!("resample_dt = {} ns: T2 = {} us", dt / NS, t2 / US);
        rows.push(vec![dt / NS, t2 / US, err / US]);
    }
    out.csv("dt_sweep.csv", &["resample_dt_ns", "T2_us", "T2_stderr_us"], rows.iter().cloned())?;
    let pts = rows.iter().map(|r| (r[0], r[1])).collect();
    out.text(
        "dt_sweep.svg",
        &Chart::new("T2 vs resampling step", "resample_dt (ns)", "T2 (us)").with(Series::markers("T2", pts)).render(),
    )?;
    Ok(
        json!({ "resample_dt_ns": rows.iter().map(|r| r[0]).collect::<Vec<_>>(), "T2_us": rows.iter().map(|r| r[1]).collect::<Vec<_>>() }),
    )
}
