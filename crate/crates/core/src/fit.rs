//! Least-squares fits of the protocol's signal models.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::engine::SignalTrace;
use crate::linalg::Matrix;
use crate::spectral::{dominant_peak, find_peaks, spectrum};
use crate::stats::pairwise_sum;
use crate::{Error, Result};

/// Fitted parameters with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub stderr: Vec<f64>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Coefficient of determination where the fit defines one.
    pub r_squared: Option<f64>,
    /// Why the fit did not converge, or other caveats.
    pub message: Option<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.stderr[i])
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn failed(names: &[&str], message: &str) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            params: vec![f64::NAN; names.len()],
            stderr: vec![f64::NAN; names.len()],
            residual_rms: f64::NAN,
            converged: false,
            iterations: 0,
            r_squared: None,
            message: Some(message.into()),
        }
    }
}

/// Settings of the damped Gauss-Newton solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative parameter-step tolerance.
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 200, tolerance: 1e-10 }
    }
}

/// A model `y(x; p)` with its gradient in `p`.
pub trait Model {
    fn names(&self) -> &[&'static str];
    /// Returns `y(x; p)` and writes `dy/dp` into `grad`.
    fn eval(&self, p: &[f64], x: f64, grad: &mut [f64]) -> f64;
}

fn ssr_of<M: Model>(m: &M, p: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let mut g = vec![0.0; p.len()];
    let r: Vec<f64> = x.iter().zip(y).map(|(&xi, &yi)| (yi - m.eval(p, xi, &mut g)).powi(2)).collect();
    pairwise_sum(&r)
}

/// `(JtJ + lambda diag(JtJ))^-1`, inverted after scaling to unit diagonal so
/// that parameters of very different magnitude stay well conditioned.
fn scaled_inverse(jtj: &Matrix, lambda: f64) -> Option<Matrix> {
    let n = jtj.dim();
    let d: Vec<f64> = (0..n).map(|a| if jtj[(a, a)] > 0.0 { jtj[(a, a)].sqrt() } else { 1.0 }).collect();
    let mut m = Matrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] = jtj[(a, b)] / (d[a] * d[b]);
        }
        m[(a, a)] += lambda;
    }
    let mut inv = m.inverse()?;
    for a in 0..n {
        for b in 0..n {
            inv[(a, b)] /= d[a] * d[b];
        }
    }
    Some(inv)
}

/// Levenberg-damped Gauss-Newton minimisation of `sum (y - model)^2`.
pub fn gauss_newton<M: Model>(m: &M, x: &[f64], y: &[f64], p0: &[f64], opts: SolverOptions) -> Result<FitResult> {
    let np = p0.len();
    if x.len() != y.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if x.len() <= np {
        return Err(Error::fit("fewer data points than parameters"));
    }
    if p0.iter().any(|v| !v.is_finite()) {
        return Err(Error::fit("initial guess is not finite"));
    }
    let mut p = p0.to_vec();
    let mut ssr = ssr_of(m, &p, x, y);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut g = vec![0.0; np];
    let mut jtj = Matrix::zeros(np);
    while iterations < opts.max_iterations {
        iterations += 1;
        jtj = Matrix::zeros(np);
        let mut jtr = vec![0.0; np];
        for (&xi, &yi) in x.iter().zip(y) {
            let r = yi - m.eval(&p, xi, &mut g);
            for a in 0..np {
                jtr[a] += g[a] * r;
                for b in 0..=a {
                    jtj[(a, b)] += g[a] * g[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[(b, a)] = jtj[(a, b)];
            }
        }
        let mut accepted = false;
        while lambda < 1e20 {
            let Some(inv) = scaled_inverse(&jtj, lambda) else {
                lambda *= 10.0;
                continue;
            };
            let step = inv.mul_vec(&jtr);
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            let trial_ssr = ssr_of(m, &trial, x, y);
            if trial_ssr.is_finite() && trial_ssr <= ssr {
                let small = step.iter().zip(&p).all(|(s, v)| s.abs() <= opts.tolerance * (v.abs() + opts.tolerance));
                p = trial;
                let flat = ssr - trial_ssr <= 1e-15 * ssr;
                ssr = trial_ssr;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                converged = small || flat || ssr == 0.0;
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step exists at any damping: a (local) minimum.
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }

    let n = x.len() as f64;
    let dof = n - np as f64;
    let cov = scaled_inverse(&jtj, 0.0);
    let stderr = match &cov {
        Some(c) => (0..np).map(|a| (c[(a, a)].max(0.0) * ssr / dof).sqrt()).collect(),
        None => vec![f64::INFINITY; np],
    };
    let residual_rms = (ssr / n).sqrt();
    let message = if !converged {
        Some("iteration limit reached".into())
    } else if cov.is_none() {
        Some("singular normal matrix: parameters not identifiable".into())
    } else {
        None
    };
    Ok(FitResult {
        names: m.names().iter().map(|s| s.to_string()).collect(),
        params: p,
        stderr,
        residual_rms,
        converged: converged && residual_rms.is_finite(),
        iterations,
        r_squared: None,
        message,
    })
}

/// Averaged echo `1/4 [1 - cos(2 tau xi_perp) e^{-tau / T2}]^2`.
pub fn hahn_decay_model(tau: f64, xi_perp: f64, t2: f64) -> f64 {
    let g = (2.0 * tau * xi_perp).cos() * (-tau / t2).exp();
    0.25 * (1.0 - g) * (1.0 - g)
}

struct HahnDecay;

impl Model for HahnDecay {
    fn names(&self) -> &[&'static str] {
        &["xi_perp", "T2"]
    }

    fn eval(&self, p: &[f64], t: f64, grad: &mut [f64]) -> f64 {
        let (xi, t2) = (p[0], p[1]);
        let (s, c) = (2.0 * t * xi).sin_cos();
        let e = (-t / t2).exp();
        let g = c * e;
        let dg_dxi = -2.0 * t * s * e;
        let dg_dt2 = g * t / (t2 * t2);
        grad[0] = -0.5 * (1.0 - g) * dg_dxi;
        grad[1] = -0.5 * (1.0 - g) * dg_dt2;
        0.25 * (1.0 - g) * (1.0 - g)
    }
}

/// Echo contrast `g = 1 - 2 sqrt(S)`, the inverse of `S = (1 - g)^2 / 4`.
pub fn echo_contrast(signal: f64) -> f64 {
    1.0 - 2.0 * signal.max(0.0).sqrt()
}

/// Fits [`hahn_decay_model`] to an averaged echo trace.
///
/// `xi_perp` starts from the dominant line of the echo contrast, which
/// oscillates at `2 xi_perp`; `T2` starts from a log-linear fit to the
/// contrast maxima. A trace shorter than a quarter of the fitted `T2` is
/// reported as not converged.
pub fn fit_hahn_decay(trace: &SignalTrace) -> Result<FitResult> {
    let names = ["xi_perp", "T2"];
    let contrast: Vec<f64> = trace.signal.iter().map(|&s| echo_contrast(s)).collect();
    let ctr = SignalTrace::new(trace.tau.clone(), contrast.clone())?;
    let sp = spectrum(&ctr)?;
    let max = sp.amplitude.iter().cloned().fold(0.0, f64::max);
    let Some(peak) = dominant_peak(&sp, 0.05 * max).filter(|_| max > 1e-9) else {
        return Ok(FitResult::failed(&names, "no oscillation found in the echo trace"));
    };
    let xi0 = PI * peak.freq;

    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 1..contrast.len() - 1 {
        let a = contrast[i].abs();
        if a > contrast[i - 1].abs() && a >= contrast[i + 1].abs() && a > 1e-6 {
            pts.push((trace.tau[i], a.ln()));
        }
    }
    let tau_max = trace.tau[trace.len() - 1];
    let mut t2_0 = tau_max / 2.0;
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        if slope < 0.0 && slope.is_finite() {
            t2_0 = -1.0 / slope;
        } else {
            t2_0 = 10.0 * tau_max;
        }
    }
    let mut fit = gauss_newton(&HahnDecay, &trace.tau, &trace.signal, &[xi0, t2_0], SolverOptions::default())?;
    let t2 = fit.params[1];
    if !(t2 > 0.0) {
        fit.converged = false;
        fit.message = Some("fitted T2 is not positive".into());
    } else if tau_max < 0.25 * t2 {
        fit.converged = false;
        fit.message = Some("trace spans less than T2/4: T2 is extrapolated".into());
    }
    Ok(fit)
}

/// Least-squares `alpha` in `T2_E = alpha E_m / sigma_E^2` from
/// `(E_m, sigma_E, T2_E)` triples, via the linearised form
/// `T2_E sigma_E^2 = alpha E_m`.
///
/// `r_squared` is evaluated on `T2_E` itself.
pub fn fit_alpha(points: &[(f64, f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::fit("fit_alpha needs at least three points"));
    }
    if points.iter().any(|&(e, s, t)| !(e.is_finite() && s > 0.0 && t.is_finite())) {
        return Err(Error::fit("points need finite E_m, T2_E and sigma_E > 0"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2 * p.1 * p.1).collect();
    let sxx = pairwise_sum(&xs.iter().map(|x| x * x).collect::<Vec<_>>());
    if !(sxx > 0.0) {
        return Err(Error::fit("degenerate design: all E_m are zero"));
    }
    let sxy = pairwise_sum(&xs.iter().zip(&ys).map(|(x, y)| x * y).collect::<Vec<_>>());
    let alpha = sxy / sxx;
    let lin_ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - alpha * x).powi(2)).sum();
    let n = points.len() as f64;
    let stderr = (lin_ssr / (n - 1.0) / sxx).sqrt();

    let t2: Vec<f64> = points.iter().map(|p| p.2).collect();
    let pred: Vec<f64> = points.iter().map(|p| alpha * p.0 / (p.1 * p.1)).collect();
    let mean = t2.iter().sum::<f64>() / n;
    let ss_res: f64 = t2.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = t2.iter().map(|a| (a - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(FitResult {
        names: vec!["alpha".into()],
        params: vec![alpha],
        stderr: vec![stderr],
        residual_rms: (ss_res / n).sqrt(),
        converged: true,
        iterations: 1,
        r_squared: Some(r2),
        message: None,
    })
}

/// `offset + amplitude cos(2 x tau) e^{-gamma tau}`: the right-polarized
/// Ramsey signal with an exponential envelope.
struct DampedCos;

impl Model for DampedCos {
    fn names(&self) -> &[&'static str] {
        &["x", "offset", "amplitude", "gamma"]
    }

    fn eval(&self, p: &[f64], t: f64, grad: &mut [f64]) -> f64 {
        let (x, o, a, g) = (p[0], p[1], p[2], p[3]);
        let (s, c) = (2.0 * x * t).sin_cos();
        let e = (-g * t).exp();
        grad[0] = -2.0 * t * a * s * e;
        grad[1] = 1.0;
        grad[2] = c * e;
        grad[3] = -t * a * c * e;
        o + a * c * e
    }
}

/// Dominant line of a trace as `(frequency in Hz, amplitude)`.
fn dominant_line(trace: &SignalTrace) -> Result<Option<(f64, f64)>> {
    let sp = spectrum(trace)?;
    let max = sp.amplitude.iter().cloned().fold(0.0, f64::max);
    if !(max > 1e-9) {
        return Ok(None);
    }
    Ok(dominant_peak(&sp, 0.1 * max).map(|p| (p.freq, p.amplitude)))
}

/// Oscillation frequency `x = sqrt(beta_z^2 + xi_perp^2)` (rad/s) of a
/// right-polarized Ramsey trace, whose signal oscillates at `2x`.
///
/// The spectral line gives the starting point for a fit of
/// `offset + amplitude cos(2 x tau) e^{-gamma tau}`.
pub fn fit_fid_frequency(trace: &SignalTrace) -> Result<FitResult> {
    let names = ["x", "offset", "amplitude", "gamma"];
    let Some((f, amp)) = dominant_line(trace)? else {
        return Ok(FitResult::failed(&names, "no spectral line above the noise floor"));
    };
    let mean = trace.signal.iter().sum::<f64>() / trace.len() as f64;
    let p0 = [PI * f, mean, amp, 0.0];
    let mut fit = gauss_newton(&DampedCos, &trace.tau, &trace.signal, &p0, SolverOptions::default())?;
    // Same curve, canonical sign.
    if fit.params[0] < 0.0 {
        fit.params[0] = -fit.params[0];
    }
    Ok(fit)
}

/// `1/2 - (S/2) sin(2 xi_perp tau) e^{-Gamma tau}` with `S = sin(phi_E)`.
struct PhiEModel;

impl Model for PhiEModel {
    fn names(&self) -> &[&'static str] {
        &["xi_perp", "sin_phi_e", "gamma"]
    }

    fn eval(&self, p: &[f64], t: f64, grad: &mut [f64]) -> f64 {
        let (xi, s_phi, g) = (p[0], p[1], p[2]);
        let (s, c) = (2.0 * xi * t).sin_cos();
        let e = (-g * t).exp();
        grad[0] = -s_phi * t * c * e;
        grad[1] = -0.5 * s * e;
        grad[2] = 0.5 * s_phi * t * s * e;
        0.5 - 0.5 * s_phi * s * e
    }
}

/// Fits the azimuth trace `(1 - sin(2 tau xi_perp) sin(phi_E) e^{-Gamma tau}) / 2`
/// starting from a known `xi_perp`; reports `sin_phi_e`.
pub fn fit_phi_e_trace(trace: &SignalTrace, xi_perp: f64) -> Result<FitResult> {
    if !(xi_perp > 0.0) {
        return Err(Error::domain("the azimuth fit needs xi_perp > 0"));
    }
    // Projection onto sin(2 xi tau) for the starting amplitude.
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &y) in trace.tau.iter().zip(&trace.signal) {
        let s = (2.0 * xi_perp * t).sin();
        num += (0.5 - y) * s;
        den += s * s;
    }
    let s0 = if den > 0.0 { (2.0 * num / den).clamp(-1.0, 1.0) } else { 0.0 };
    gauss_newton(&PhiEModel, &trace.tau, &trace.signal, &[xi_perp, s0, 0.0], SolverOptions::default())
}

/// `3/8 - (1/2) cos(xi_perp tau) cos(xi_z tau) e^{-g1 tau} + (1/8) cos(2 xi_perp tau) e^{-g2 tau}`,
/// the left-polarized half-pulse Ramsey signal with separate envelopes for the
/// beat and the `2 xi_perp` line.
struct XiZModel;

impl Model for XiZModel {
    fn names(&self) -> &[&'static str] {
        &["xi_perp", "xi_z", "gamma_1", "gamma_2"]
    }

    fn eval(&self, p: &[f64], t: f64, grad: &mut [f64]) -> f64 {
        let (xp, xz, g1, g2) = (p[0], p[1], p[2], p[3]);
        let (sp, cp) = (xp * t).sin_cos();
        let (sz, cz) = (xz * t).sin_cos();
        let (s2, c2) = (2.0 * xp * t).sin_cos();
        let e1 = (-g1 * t).exp();
        let e2 = (-g2 * t).exp();
        grad[0] = 0.5 * t * sp * cz * e1 - 0.25 * t * s2 * e2;
        grad[1] = 0.5 * t * cp * sz * e1;
        grad[2] = 0.5 * t * cp * cz * e1;
        grad[3] = -0.125 * t * c2 * e2;
        0.375 - 0.5 * cp * cz * e1 + 0.125 * c2 * e2
    }
}

/// Axial Stark shift from a left-polarized half-pulse Ramsey trace.
///
/// The lines at `(xi_perp +- xi_z) / 2 pi` seed a fit of the beat model.
/// Fails with [`Error::Fit`] when the two lines are not separate peaks. Only
/// `|xi_z|` is observable.
pub fn fit_xi_z_trace(trace: &SignalTrace, xi_perp_guess: f64) -> Result<FitResult> {
    let sp = spectrum(trace)?;
    let max = sp.amplitude.iter().cloned().fold(0.0, f64::max);
    let f_guess = xi_perp_guess / (2.0 * PI);
    let mut lines: Vec<_> =
        find_peaks(&sp, 0.05 * max).into_iter().filter(|p| (p.freq - f_guess).abs() < 0.25 * f_guess).collect();
    lines.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    // The two lines carry equal weight; a much weaker partner or one closer
    // than a transform bin is a sidelobe of a single unresolved line.
    let unresolved = lines.len() < 2
        || lines[1].amplitude < 0.5 * lines[0].amplitude
        || (lines[0].freq - lines[1].freq).abs() < sp.resolution;
    if unresolved {
        return Err(Error::fit("the xi_perp +- xi_z lines are not resolved"));
    }
    let (lo, hi) = if lines[0].freq < lines[1].freq { (lines[0], lines[1]) } else { (lines[1], lines[0]) };
    let p0 = [PI * (hi.freq + lo.freq), PI * (hi.freq - lo.freq), 0.0, 0.0];
    let mut fit = gauss_newton(&XiZModel, &trace.tau, &trace.signal, &p0, SolverOptions::default())?;
    fit.params[1] = fit.params[1].abs();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use crate::engine::{fid_phi_e_closed, fid_xi_perp_closed, fid_xi_z_closed, linear_grid};

    fn trace(taus: Vec<f64>, f: impl Fn(f64) -> f64) -> SignalTrace {
        let s = taus.iter().map(|&t| f(t)).collect();
        SignalTrace::new(taus, s).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn hahn_self_fit() {
        let xi = TWO_PI * 1.7e6;
        let t2 = 40e-6;
        let tr = trace(linear_grid(120e-6, 2400), |t| hahn_decay_model(t, xi, t2));
        let fit = fit_hahn_decay(&tr).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!(rel(fit.get("xi_perp").unwrap(), xi) < 1e-6);
        assert!(rel(fit.get("T2").unwrap(), t2) < 1e-6);
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn hahn_short_trace_is_flagged() {
        let xi = TWO_PI * 1.7e6;
        let tr = trace(linear_grid(8e-6, 400), |t| hahn_decay_model(t, xi, 40e-6));
        let fit = fit_hahn_decay(&tr).unwrap();
        assert!(!fit.converged);
        assert!(fit.message.is_some());
    }

    #[test]
    fn alpha_exact_and_degenerate() {
        let alpha = 3.3e-9;
        let pts: Vec<(f64, f64, f64)> = [(1.0, 0.5), (2.0, 0.5), (1.0, 0.75), (4.0, 1.0)]
            .iter()
            .map(|&(e, s)| (e, s, alpha * e / (s * s)))
            .collect();
        let fit = fit_alpha(&pts).unwrap();
        assert!(rel(fit.params[0], alpha) < 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
        assert!(fit_alpha(&pts[..1]).is_err());
        assert!(fit_alpha(&[(0.0, 1.0, 1.0), (0.0, 2.0, 1.0), (0.0, 3.0, 2.0)]).is_err());
    }

    #[test]
    fn fid_frequency_recovery() {
        let xi = TWO_PI * 2.404e6;
        let tr = trace(linear_grid(8.0 / (2.0 * 2.404e6), 1024), |t| fid_xi_perp_closed(t, 0.0, xi));
        let fit = fit_fid_frequency(&tr).unwrap();
        assert!(fit.converged);
        assert!(rel(fit.get("x").unwrap(), xi) < 1e-8);

        let bz = TWO_PI * 2.8e6;
        let tr = trace(linear_grid(2e-6, 512), |t| (bz * t).cos().powi(2));
        let fit = fit_fid_frequency(&tr).unwrap();
        assert!(rel(fit.get("x").unwrap(), bz) < 1e-8);

        let tr = trace(linear_grid(2e-6, 512), |_| 0.0);
        assert!(!fit_fid_frequency(&tr).unwrap().converged);
    }

    #[test]
    fn fid_frequency_with_zeeman_mixing() {
        let (bz, xi) = (TWO_PI * 0.9e6, TWO_PI * 1.4e6);
        let x = bz.hypot(xi);
        let tr = trace(linear_grid(6e-6, 700), |t| fid_xi_perp_closed(t, bz, xi));
        let fit = fit_fid_frequency(&tr).unwrap();
        assert!(rel(fit.get("x").unwrap(), x) < 1e-8);
    }

    #[test]
    fn phi_e_fit() {
        let xi = TWO_PI * 0.85e6;
        let phi = 0.927;
        let tr = trace(linear_grid(10e-6, 800), |t| fid_phi_e_closed(t, xi, phi));
        let fit = fit_phi_e_trace(&tr, xi * 1.0005).unwrap();
        assert!(fit.converged);
        assert!((fit.get("sin_phi_e").unwrap() - phi.sin()).abs() < 1e-9);
        assert!(rel(fit.get("xi_perp").unwrap(), xi) < 1e-9);
    }

    #[test]
    fn xi_z_fit() {
        let xp = TWO_PI * 2.404e6;
        let xz = TWO_PI * 35e3;
        let tr = trace(linear_grid(8.0 / (2.0 * 35e3), 4096), |t| fid_xi_z_closed(t, xp, xz));
        let fit = fit_xi_z_trace(&tr, xp).unwrap();
        assert!(fit.converged);
        assert!(rel(fit.get("xi_z").unwrap(), xz) < 1e-8);
        assert!(rel(fit.get("xi_perp").unwrap(), xp) < 1e-10);
    }

    #[test]
    fn solver_rejects_underdetermined() {
        let tr = trace(linear_grid(1.0, 3), |t| t);
        assert!(gauss_newton(&DampedCos, &tr.tau, &tr.signal, &[1.0, 0.0, 1.0, 0.0], SolverOptions::default()).is_err());
    }
}
