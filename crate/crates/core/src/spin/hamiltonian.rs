use core::f64::consts::{FRAC_PI_2, SQRT_2};

use num_traits::Float;

use super::operator::{Operator3, StateVector, MINUS, PLUS, ZERO};
use crate::constants::{wrap_angle, NvConstants, TWO_PI};
use crate::{Error, FieldVector, Result, C64};

/// Frequency content of the rotating-frame Hamiltonian, all angular (rad/s)
/// except the azimuth `phi_e` (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NVFrequencies {
    /// Detuning `Delta = 2 pi D - omega_d`.
    pub delta: f64,
    pub beta_z: f64,
    pub xi_z: f64,
    pub xi_perp: f64,
    /// Azimuth of the transverse field in `[0, 2 pi)`.
    pub phi_e: f64,
}

impl NVFrequencies {
    pub fn new(delta: f64, beta_z: f64, xi_z: f64, xi_perp: f64, phi_e: f64) -> Result<Self> {
        let f = Self { delta, beta_z, xi_z, xi_perp, phi_e: wrap_angle(phi_e) };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta, self.beta_z, self.xi_z, self.xi_perp, self.phi_e];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("frequencies must be finite"));
        }
        if self.xi_perp < 0.0 {
            return Err(Error::invalid("xi_perp must be non-negative"));
        }
        Ok(())
    }

    /// Mixing frequency `x = sqrt(beta_z^2 + xi_perp^2)` of the `|+-1>` manifold.
    pub fn mixing(&self) -> f64 {
        self.beta_z.hypot(self.xi_perp)
    }

    /// Largest angular frequency appearing in `H0`.
    pub fn max_frequency(&self) -> f64 {
        (self.delta + self.xi_z).abs() + self.mixing()
    }
}

impl NvConstants {
    /// Maps a field `E` (V/m), an axial magnetic field `B_z` (T) and the drive
    /// frequency `omega_d` (rad/s) onto the Hamiltonian's frequencies.
    pub fn frequencies(&self, e: FieldVector, b_z: f64, omega_d: f64) -> NVFrequencies {
        let phi = wrap_angle(e.y.atan2(e.x));
        NVFrequencies {
            delta: TWO_PI * self.zero_field_splitting - omega_d,
            beta_z: TWO_PI * self.gamma_e * b_z,
            xi_z: TWO_PI * self.d_parallel * e.z,
            xi_perp: TWO_PI * self.d_perp * e.transverse(),
            phi_e: phi,
        }
    }

    /// Inverse of [`NvConstants::frequencies`] for the electric part:
    /// `(E_perp, E_z)` in V/m from `(xi_perp, xi_z)`.
    pub fn field_from_frequencies(&self, xi_perp: f64, xi_z: f64) -> (f64, f64) {
        (xi_perp / (TWO_PI * self.d_perp), xi_z / (TWO_PI * self.d_parallel))
    }
}

/// Field-to-frequency map with an explicit constants table.
pub fn field_to_frequencies(e: FieldVector, b_z: f64, omega_d: f64, constants: &NvConstants) -> Result<NVFrequencies> {
    if !(e.is_finite() && b_z.is_finite() && omega_d.is_finite()) {
        return Err(Error::invalid("field, B_z and omega_d must be finite"));
    }
    Ok(constants.frequencies(e, b_z, omega_d))
}

/// Drive polarization, selected by the phase between the two wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// `phi = -pi/2`: `eps_+ = 1`, drives `|0> <-> |+1>`.
    Plus,
    /// `phi = +pi/2`: `eps_- = 1`, drives `|0> <-> |-1>`.
    Minus,
    /// `phi = 0`: drives both transitions with `|eps_+-| = 1/sqrt 2`.
    Linear,
}

impl Polarization {
    pub fn wire_phase(self) -> f64 {
        match self {
            Polarization::Plus => -FRAC_PI_2,
            Polarization::Minus => FRAC_PI_2,
            Polarization::Linear => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSettings {
    /// Rabi amplitude `Omega` (rad/s).
    pub omega: f64,
    /// Phase between the wires (rad).
    pub phi: f64,
}

impl DriveSettings {
    pub fn new(omega: f64, phi: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("drive amplitude must be positive"));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("drive phase must be finite"));
        }
        Ok(Self { omega, phi })
    }

    pub fn polarized(omega: f64, pol: Polarization) -> Result<Self> {
        Self::new(omega, pol.wire_phase())
    }

    /// `eps_+ = (1 - i e^{-i phi}) / 2`.
    pub fn epsilon_plus(&self) -> C64 {
        (C64::new(1.0, 0.0) - C64::i() * C64::from_polar(1.0, -self.phi)) * 0.5
    }

    /// `eps_- = (1 - i e^{+i phi}) / 2`.
    pub fn epsilon_minus(&self) -> C64 {
        (C64::new(1.0, 0.0) - C64::i() * C64::from_polar(1.0, self.phi)) * 0.5
    }
}

/// `H0 = (Delta + xi_z) S_z^2 + beta_z S_z - xi_perp/2 (S_+^2 e^{i phi_E} + h.c.)`.
///
/// `S_+^2 = 2 |+1><-1|`, so the only off-diagonal element is
/// `<+1|H0|-1> = -xi_perp e^{i phi_E}`.
pub fn build_h0(f: &NVFrequencies) -> Operator3 {
    let a = f.delta + f.xi_z;
    let mut h = Operator3::ZERO;
    h[(PLUS, PLUS)] = C64::new(a + f.beta_z, 0.0);
    h[(MINUS, MINUS)] = C64::new(a - f.beta_z, 0.0);
    let off = C64::from_polar(-f.xi_perp, f.phi_e);
    h[(PLUS, MINUS)] = off;
    h[(MINUS, PLUS)] = off.conj();
    h
}

/// `H_d = Omega/sqrt 2 (eps_- |0><-1| + eps_+ |+1><0| + h.c.)`.
pub fn build_drive(d: &DriveSettings) -> Operator3 {
    let s = d.omega / SQRT_2;
    let ep = d.epsilon_plus() * s;
    let em = d.epsilon_minus() * s;
    let mut h = Operator3::ZERO;
    h[(PLUS, ZERO)] = ep;
    h[(ZERO, PLUS)] = ep.conj();
    h[(ZERO, MINUS)] = em;
    h[(MINUS, ZERO)] = em.conj();
    h
}

/// Eigen-decomposition of `H0`: `|0>` with energy 0 and
///
/// ```text
/// |+> =  cos(theta/2) e^{i phi_E/2} |+1> + sin(theta/2) e^{-i phi_E/2} |-1>
/// |-> =  sin(theta/2) e^{i phi_E/2} |+1> - cos(theta/2) e^{-i phi_E/2} |-1>
/// ```
///
/// with `tan(theta) = -xi_perp / beta_z` and energies
/// `omega_+- = Delta + xi_z +- sqrt(beta_z^2 + xi_perp^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub theta: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub plus: StateVector,
    pub minus: StateVector,
    pub zero: StateVector,
}

pub fn eigensystem(f: &NVFrequencies) -> EigenSystem {
    // The branch is fixed by atan2 so that |+> belongs to omega_+; at
    // beta_z = 0 this gives theta = -pi/2.
    let theta = (-f.xi_perp).atan2(f.beta_z);
    let x = f.mixing();
    let a = f.delta + f.xi_z;
    let (s, c) = (0.5 * theta).sin_cos();
    let up = C64::from_polar(1.0, 0.5 * f.phi_e);
    let dn = C64::from_polar(1.0, -0.5 * f.phi_e);
    let zero = C64::new(0.0, 0.0);
    EigenSystem {
        theta,
        omega_plus: a + x,
        omega_minus: a - x,
        plus: StateVector([up * c, zero, dn * s]),
        minus: StateVector([up * s, zero, -dn * c]),
        zero: StateVector::basis(ZERO),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::units::{GAUSS, MHZ, V_PER_UM};
    use core::f64::consts::PI;

    #[test]
    fn stark_frequencies_for_reference_field() {
        let k = NvConstants::default();
        let e = FieldVector::new(10.0, 10.0, 10.0) * V_PER_UM;
        let f = field_to_frequencies(e, 0.0, k.resonant_drive(), &k).unwrap();
        assert!((f.xi_perp / TWO_PI / MHZ - 2.404).abs() < 5e-4);
        assert!((f.xi_z / TWO_PI / MHZ - 0.035).abs() < 1e-9);
        assert!((f.phi_e - PI / 4.0).abs() < 1e-15);
        assert_eq!(f.delta, 0.0);
    }

    #[test]
    fn zeeman_one_gauss() {
        let k = NvConstants::default();
        let f = k.frequencies(FieldVector::ZERO, 1.0 * GAUSS, k.resonant_drive());
        assert!((f.beta_z / TWO_PI / MHZ - 2.8).abs() < 1e-9);
    }

    #[test]
    fn zero_inputs_give_zero_frequencies() {
        let k = NvConstants::default();
        let f = k.frequencies(FieldVector::ZERO, 0.0, k.resonant_drive());
        assert_eq!(f, NVFrequencies::default());
        assert_eq!(build_h0(&f), Operator3::ZERO);
    }

    #[test]
    fn negative_transverse_azimuth_is_wrapped() {
        let k = NvConstants::default();
        let f = k.frequencies(FieldVector::new(1.0, -1.0, 0.0), 0.0, 0.0);
        assert!((f.phi_e - 7.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn h0_has_no_zero_coupling_and_is_hermitian() {
        let f = NVFrequencies::new(0.3, -1.2, 0.4, 2.5, 1.0).unwrap();
        let h = build_h0(&f);
        for j in [PLUS, MINUS] {
            assert_eq!(h[(ZERO, j)], C64::new(0.0, 0.0));
            assert_eq!(h[(j, ZERO)], C64::new(0.0, 0.0));
        }
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn drive_polarization_factors() {
        let plus = DriveSettings::polarized(1.0, Polarization::Plus).unwrap();
        assert!((plus.epsilon_plus() - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(plus.epsilon_minus().norm() < 1e-15);
        let minus = DriveSettings::polarized(1.0, Polarization::Minus).unwrap();
        assert!(minus.epsilon_plus().norm() < 1e-15);
        assert!((minus.epsilon_minus() - C64::new(1.0, 0.0)).norm() < 1e-15);
        let lin = DriveSettings::polarized(1.0, Polarization::Linear).unwrap();
        assert!((lin.epsilon_plus().norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((lin.epsilon_minus().norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let h = build_drive(&lin);
        assert_eq!(h, h.adjoint());
        assert!(DriveSettings::new(0.0, 0.0).is_err());
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let cases = [
            (0.2, 1.3, -0.4, 0.9, 2.2),
            (0.0, 0.0, 0.0, 1.7, 0.3),
            (0.1, -2.0, 0.0, 0.5, 5.9),
            (0.0, 1.0, 0.0, 0.0, 1.0),
            (0.0, -1.0, 0.0, 0.0, 1.0),
        ];
        for (d, b, z, p, phi) in cases {
            let f = NVFrequencies::new(d, b, z, p, phi).unwrap();
            let h = build_h0(&f);
            let es = eigensystem(&f);
            for (v, w) in [(es.plus, es.omega_plus), (es.minus, es.omega_minus), (es.zero, 0.0)] {
                let hv = h.apply(&v);
                for k in 0..3 {
                    assert!((hv.0[k] - v.0[k] * w).norm() < 1e-12);
                }
                assert!((v.norm_squared() - 1.0).abs() < 1e-12);
            }
            assert!(es.plus.inner(&es.minus).norm() < 1e-12);
            assert!((es.theta.tan() + p / b).abs() < 1e-9 || b == 0.0);
        }
    }

    #[test]
    fn eigensystem_limits() {
        let f = NVFrequencies::new(0.5, 0.0, 0.25, 2.0, 0.0).unwrap();
        let es = eigensystem(&f);
        assert!((es.omega_plus - 2.75).abs() < 1e-15);
        assert!((es.omega_minus - (-1.25)).abs() < 1e-15);

        let f = NVFrequencies::new(0.0, 1.5, 0.0, 0.0, 0.8).unwrap();
        let es = eigensystem(&f);
        let expect = C64::from_polar(1.0, 0.4);
        assert!((es.plus.0[PLUS] - expect).norm() < 1e-15);
        assert!(es.plus.0[MINUS].norm() < 1e-15);
    }
}
