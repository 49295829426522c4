use nvfield_core::constants::TWO_PI;
use nvfield_core::engine::{fid_phi_e_closed, fid_xi_perp_closed, fid_xi_z_closed, linear_grid, SignalTrace};
use nvfield_core::fit::{
    fit_alpha, fit_fid_frequency, fit_hahn_decay, fit_phi_e_trace, fit_xi_z_trace, hahn_decay_model,
};
use nvfield_core::rng::{stream, Domain};
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

const MHZ: f64 = 1e6;

fn trace(taus: Vec<f64>, noise: f64, seed: u64, f: impl Fn(f64) -> f64) -> SignalTrace {
    let mut rng = stream(seed, Domain::Noise, 0);
    let n = Normal::new(0.0, noise.max(1e-300)).unwrap();
    let s = taus.iter().map(|&t| f(t) + if noise > 0.0 { n.sample(&mut rng) } else { 0.0 }).collect();
    SignalTrace::new(taus, s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ramsey_frequency_is_recovered(xp in 0.3..3.0, beta in -1.0..1.0) {
        let (x, b) = (TWO_PI * xp * MHZ, TWO_PI * beta * MHZ);
        let xx = f64::hypot(x, b);
        let tr = trace(linear_grid(8.0 * std::f64::consts::PI / xx, 1024), 0.0, 0, |t| fid_xi_perp_closed(t, b, x));
        let fit = fit_fid_frequency(&tr).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(rel(fit.get("x").unwrap(), xx) < 1e-8);
    }

    #[test]
    fn azimuth_fit_recovers_sine(xp in 0.3..3.0, phi in -1.5..1.5) {
        let x = TWO_PI * xp * MHZ;
        let tr = trace(linear_grid(8.0 * std::f64::consts::PI / x, 1024), 0.0, 0, |t| fid_phi_e_closed(t, x, phi));
        let fit = fit_phi_e_trace(&tr, x * 1.002).unwrap();
        prop_assert!((fit.get("sin_phi_e").unwrap() - phi.sin()).abs() < 1e-8);
    }

    #[test]
    fn alpha_is_exact_on_the_model(alpha in 1e-10..1e-6, scale in 0.5..2.0) {
        let pts: Vec<(f64, f64, f64)> = [(1.0f64, 0.5f64), (1.0, 1.0), (2.0, 0.75), (0.5, 0.25)]
            .iter()
            .map(|&(e, s)| (e * 1e6 * scale, s * 1e6, alpha * e * 1e6 * scale / (s * 1e6).powi(2)))
            .collect();
        let fit = fit_alpha(&pts).unwrap();
        prop_assert!(rel(fit.get("alpha").unwrap(), alpha) < 1e-10);
        prop_assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn noisy_hahn_fit_is_consistent_with_its_error() {
    let xi = TWO_PI * 0.24 * MHZ;
    let t2 = 40e-6;
    let mut z = Vec::new();
    for seed in 0..8 {
        let tr = trace(linear_grid(150e-6, 600), 0.01, seed, |t| hahn_decay_model(t, xi, t2));
        let fit = fit_hahn_decay(&tr).unwrap();
        assert!(fit.converged, "{fit:?}");
        z.push((fit.get("T2").unwrap() - t2) / fit.stderr_of("T2").unwrap());
    }
    assert!(z.iter().all(|v| v.abs() < 4.0), "{z:?}");
    let rms = (z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64).sqrt();
    assert!(rms > 0.3 && rms < 2.0, "{rms}");
}

#[test]
fn beat_fit_recovers_axial_shift() {
    let (xp, xz) = (TWO_PI * 2.404 * MHZ, TWO_PI * 0.035 * MHZ);
    let tr = trace(linear_grid(114e-6, 4096), 0.0, 0, |t| fid_xi_z_closed(t, xp, xz));
    let fit = fit_xi_z_trace(&tr, xp * 1.01).unwrap();
    assert!(rel(fit.get("xi_z").unwrap(), xz) < 1e-8);
    assert!(rel(fit.get("xi_perp").unwrap(), xp) < 1e-8);
    let noisy = trace(linear_grid(114e-6, 4096), 0.02, 5, |t| fid_xi_z_closed(t, xp, -xz));
    let fit = fit_xi_z_trace(&noisy, xp).unwrap();
    assert!(rel(fit.get("xi_z").unwrap(), xz) < 0.02);
}

#[test]
fn unresolved_beat_is_an_error() {
    let (xp, xz) = (TWO_PI * 2.404 * MHZ, TWO_PI * 0.035 * MHZ);
    let tr = trace(linear_grid(5e-6, 512), 0.0, 0, |t| fid_xi_z_closed(t, xp, xz));
    assert!(matches!(fit_xi_z_trace(&tr, xp), Err(nvfield_core::Error::Fit(_))));
}

#[test]
fn flat_trace_does_not_converge() {
    let tr = trace(linear_grid(1e-6, 64), 0.0, 0, |_| 1.0);
    assert!(!fit_fid_frequency(&tr).unwrap().converged);
    let short = trace(linear_grid(5e-6, 200), 0.0, 0, |t| hahn_decay_model(t, TWO_PI * MHZ, 100e-6));
    let fit = fit_hahn_decay(&short).unwrap();
    assert!(!fit.converged);
}
