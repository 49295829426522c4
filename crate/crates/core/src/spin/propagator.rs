use core::f64::consts::{PI, SQRT_2};

use num_traits::Float;

use super::hamiltonian::{build_drive, build_h0, DriveSettings, NVFrequencies};
use super::operator::{Operator3, MINUS, PLUS, ZERO};
use crate::C64;

/// Closed-form `F(tau) = exp(-i H0 tau)`.
///
/// The `|+-1>` block is `e^{-i tau (Delta + xi_z)}` times an SU(2) rotation
/// about the axis `(-xi_perp cos phi_E, xi_perp sin phi_E, beta_z) / x`.
pub fn free_propagator(f: &NVFrequencies, tau: f64) -> Operator3 {
    let x = f.mixing();
    let (s, c) = (tau * x).sin_cos();
    let sinc = if x == 0.0 { tau } else { s / x };
    let global = C64::from_polar(1.0, -tau * (f.delta + f.xi_z));
    let mut u = Operator3::ZERO;
    u[(ZERO, ZERO)] = C64::new(1.0, 0.0);
    u[(PLUS, PLUS)] = global * C64::new(c, -f.beta_z * sinc);
    u[(MINUS, MINUS)] = global * C64::new(c, f.beta_z * sinc);
    let off = global * C64::i() * (f.xi_perp * sinc);
    u[(PLUS, MINUS)] = off * C64::from_polar(1.0, f.phi_e);
    u[(MINUS, PLUS)] = off * C64::from_polar(1.0, -f.phi_e);
    u
}

/// Closed-form hard-pulse propagator `R(t) = exp(-i H_d t)`.
///
/// Writing `H_d = (Omega/sqrt 2) M`, the matrix `M` satisfies `M^3 = M`
/// because `|eps_+|^2 + |eps_-|^2 = 1`, so
/// `R = 1 - i sin(a) M + (cos(a) - 1) M^2` with `a = Omega t / sqrt 2`.
pub fn drive_propagator(d: &DriveSettings, t: f64) -> Operator3 {
    let m = build_drive(&DriveSettings { omega: SQRT_2, phi: d.phi });
    let a = d.omega * t / SQRT_2;
    let (s, c) = a.sin_cos();
    Operator3::IDENTITY + m.scale(C64::new(0.0, -s)) + (m * m).scale(C64::new(c - 1.0, 0.0))
}

/// Pulse propagator including `H0` during the pulse, by numeric exponential.
pub fn full_pulse_propagator(f: &NVFrequencies, d: &DriveSettings, t: f64) -> Operator3 {
    (build_h0(f) + build_drive(d)).evolve_numeric(t)
}

/// `(T_pi, T_pi/2) = (pi / (sqrt 2 Omega), pi / (2 sqrt 2 Omega))`.
pub fn pulse_durations(d: &DriveSettings) -> (f64, f64) {
    let t_pi = pulse_time(d, PI);
    (t_pi, 0.5 * t_pi)
}

/// Duration of a pulse with rotation angle `angle` (`pi` transfers the
/// driven transition completely).
pub fn pulse_time(d: &DriveSettings, angle: f64) -> f64 {
    angle / (SQRT_2 * d.omega)
}

#[cfg(test)]
mod tests {
    use super::super::{Polarization, StateVector};
    use super::*;
    use crate::constants::TWO_PI;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn free_identity_at_zero() {
        let f = NVFrequencies::new(1.0, 2.0, 3.0, 4.0, 0.5).unwrap();
        assert!(free_propagator(&f, 0.0).max_abs_diff(&Operator3::IDENTITY) < 1e-15);
    }

    #[test]
    fn free_without_mixing_is_diagonal() {
        let f = NVFrequencies::new(0.7, 0.0, 0.2, 0.0, 1.1).unwrap();
        let tau = 2.3;
        let p = C64::from_polar(1.0, -tau * 0.9);
        let expect = Operator3::diagonal([p, C64::new(1.0, 0.0), p]);
        assert!(free_propagator(&f, tau).max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn free_matches_numeric_exponential() {
        let f = NVFrequencies::new(0.3, -1.1, 0.4, 2.2, 4.0).unwrap();
        for tau in [0.01, 0.5, 3.7] {
            let a = free_propagator(&f, tau);
            let b = build_h0(&f).evolve_numeric(tau);
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn right_polarized_pi_pulse() {
        let d = DriveSettings::polarized(TWO_PI * 10e6, Polarization::Plus).unwrap();
        let (t_pi, t_half) = pulse_durations(&d);
        assert!((t_pi - 35.355e-9).abs() < 1e-12);
        let psi = drive_propagator(&d, t_pi).apply(&StateVector::basis(ZERO));
        assert!(close(psi.0[PLUS], C64::new(0.0, -1.0)));
        let half = drive_propagator(&d, t_half).apply(&StateVector::basis(ZERO));
        assert!((half.population(ZERO) - 0.5).abs() < 1e-12);
        let full = drive_propagator(&d, 2.0 * t_pi).apply(&StateVector::basis(ZERO));
        assert!(close(full.0[ZERO], C64::new(-1.0, 0.0)));
    }

    #[test]
    fn linear_pi_pulse_makes_equal_superposition() {
        let d = DriveSettings::polarized(1.0, Polarization::Linear).unwrap();
        let (t_pi, _) = pulse_durations(&d);
        let psi = drive_propagator(&d, t_pi).apply(&StateVector::basis(ZERO));
        assert!(psi.population(ZERO) < 1e-24);
        assert!((psi.population(PLUS) - 0.5).abs() < 1e-12);
        assert!((psi.population(MINUS) - 0.5).abs() < 1e-12);
        let r2 = core::f64::consts::FRAC_1_SQRT_2;
        let phase = C64::from_polar(1.0, PI / 4.0);
        assert!(close(psi.0[PLUS], -phase * r2));
        assert!(close(psi.0[MINUS], -phase * C64::new(0.0, r2)));
    }

    #[test]
    fn plus_drive_leaves_minus_one_alone() {
        let d = DriveSettings::polarized(3.0, Polarization::Plus).unwrap();
        for t in [0.1, 1.0, 7.5] {
            let u = drive_propagator(&d, t);
            assert!((u[(MINUS, MINUS)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn drive_matches_numeric_exponential() {
        let d = DriveSettings::new(2.0, 0.37).unwrap();
        for t in [0.05, 0.9, 4.4] {
            let a = drive_propagator(&d, t);
            let b = build_drive(&d).evolve_numeric(t);
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn full_pulse_reduces_to_hard_pulse_without_h0() {
        let d = DriveSettings::new(2.0, -0.4).unwrap();
        let f = NVFrequencies::default();
        let a = full_pulse_propagator(&f, &d, 1.3);
        assert!(a.max_abs_diff(&drive_propagator(&d, 1.3)) < 1e-12);
    }
}
