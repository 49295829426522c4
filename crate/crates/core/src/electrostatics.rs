//! Electric field inside a dielectric nanodiamond surrounded by electrolyte ions.
//!
//! The nanodiamond is a sphere of radius `r_nd` and relative permittivity
//! `eps_nd` embedded in an electrolyte of permittivity `eps_e`. Ions occupy
//! the spherical shell `r_nd <= |b| <= R`. The field at the sphere centre due
//! to a single ion is
//!
//! ```text
//! E = q / (4 pi eps0) * 3 / (2 eps_e + eps_nd) * b / |b|^3
//! ```
//!
//! which is parallel to `b` for `q > 0`; it equals the gradient of
//! [`potential_series`] at the origin. For `N = c N_A V` uncorrelated ions
//! placed uniformly in the shell, each Cartesian component has standard
//! deviation `sigma = A sqrt(c (1/r_nd - 1/R))` ([`sigma_closed_form`]).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};

use crate::constants::{AVOGADRO, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::rng::{self, Domain};
use crate::stats;
use crate::{Error, FieldVector, Result};

/// Dielectric geometry of the nanodiamond and the sampling shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricConfig {
    pub eps_e: f64,
    pub eps_nd: f64,
    /// Nanodiamond radius (m).
    pub r_nd: f64,
    /// Outer radius of the ion shell (m).
    pub shell_radius: f64,
}

impl DielectricConfig {
    pub fn new(eps_e: f64, eps_nd: f64, r_nd: f64, shell_radius: f64) -> Result<Self> {
        let cfg = Self { eps_e, eps_nd, r_nd, shell_radius };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_e > 0.0 && self.eps_nd > 0.0) {
            return Err(Error::invalid("permittivities must be positive"));
        }
        // R == r_nd is allowed: an empty shell with sigma = 0.
        if !(self.r_nd > 0.0 && self.r_nd <= self.shell_radius && self.shell_radius.is_finite()) {
            return Err(Error::invalid("radii must satisfy 0 < r_nd <= R"));
        }
        Ok(())
    }

    /// Shell volume `4 pi / 3 (R^3 - r_nd^3)` (m^3).
    pub fn shell_volume(&self) -> f64 {
        4.0 * PI / 3.0 * (self.shell_radius.powi(3) - self.r_nd.powi(3))
    }

    /// `1/r_nd - 1/R` (1/m).
    pub fn radial_factor(&self) -> f64 {
        1.0 / self.r_nd - 1.0 / self.shell_radius
    }

    fn field_prefactor(&self) -> f64 {
        ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY) * 3.0 / (2.0 * self.eps_e + self.eps_nd)
    }
}

/// A point ion. `charge` is a signed multiple of the elementary charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ion {
    pub charge: i32,
    /// Position relative to the nanodiamond centre (m).
    pub position: FieldVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonConfiguration {
    pub ions: Vec<Ion>,
    /// Molar concentration (mol/m^3).
    pub concentration: f64,
    pub seed: u64,
}

/// Per-component statistics of the field over Monte Carlo trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub mean: FieldVector,
    pub std: FieldVector,
    pub trials: usize,
}

/// Ion-count rule for a sampled configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IonCount {
    /// `N = round(c N_A V)` in every trial.
    #[default]
    Fixed,
    /// `N ~ Poisson(c N_A V)` drawn per trial.
    Poisson,
}

/// Field at the nanodiamond centre due to one ion.
pub fn single_ion_field(ion: &Ion, cfg: &DielectricConfig) -> Result<FieldVector> {
    let b2 = ion.position.norm_squared();
    if !(b2.sqrt() >= cfg.r_nd) {
        return Err(Error::domain(format!(
            "ion at |b| = {:e} m lies inside the nanodiamond (r_nd = {:e} m)",
            b2.sqrt(),
            cfg.r_nd
        )));
    }
    Ok(ion_field_unchecked(ion.charge as f64, ion.position, b2, cfg.field_prefactor()))
}

#[inline]
fn ion_field_unchecked(charge: f64, b: FieldVector, b2: f64, prefactor: f64) -> FieldVector {
    let scale = charge * prefactor / (b2 * b2.sqrt());
    b * scale
}

/// Legendre polynomials `P_0 ..= P_l_max` at `x` by Bonnet's recursion.
pub fn legendre_all(l_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l_max + 1);
    p.push(1.0);
    if l_max >= 1 {
        p.push(x);
    }
    for l in 1..l_max {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

/// Partial sum (orders `0..=l_max`) of the potential inside the nanodiamond
/// at radius `r` and polar angle `theta` measured from the ion direction,
/// for a charge `q` (C) at distance `b`.
pub fn potential_series(r: f64, theta: f64, b: f64, q: f64, cfg: &DielectricConfig, l_max: usize) -> Result<f64> {
    if !(r >= 0.0 && r < cfg.r_nd) {
        return Err(Error::domain("the multipole series is only valid for 0 <= r < r_nd"));
    }
    if !(b >= cfg.r_nd) {
        return Err(Error::domain("the ion must lie outside the nanodiamond"));
    }
    let p = legendre_all(l_max, theta.cos());
    let (ee, end) = (cfg.eps_e, cfg.eps_nd);
    let ratio = r / b;
    let mut radial = 1.0 / b;
    let mut sum = 0.0;
    for (l, pl) in p.iter().enumerate() {
        let lf = l as f64;
        let coeff = ee * (2.0 * lf + 1.0) / (end * lf + ee * (lf + 1.0));
        sum += coeff * radial * pl;
        radial *= ratio;
    }
    Ok(q / (4.0 * PI * VACUUM_PERMITTIVITY * ee) * sum)
}

/// Number of ions in the shell for molar concentration `c` (mol/m^3).
pub fn expected_ion_count(c: f64, cfg: &DielectricConfig) -> f64 {
    c * AVOGADRO * cfg.shell_volume()
}

fn sample_one<R: Rng>(rng: &mut R, r3: f64, span3: f64, cfg: &DielectricConfig) -> Ion {
    let u: f64 = rng.random();
    let b = (r3 + u * span3).cbrt().clamp(cfg.r_nd, cfg.shell_radius);
    let cos_t = 2.0 * rng.random::<f64>() - 1.0;
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    let charge = if rng.random::<bool>() { 1 } else { -1 };
    Ion { charge, position: FieldVector::new(b * sin_t * phi.cos(), b * sin_t * phi.sin(), b * cos_t) }
}

fn trial_count<R: Rng>(rng: &mut R, c: f64, cfg: &DielectricConfig, count: IonCount) -> usize {
    let mean = expected_ion_count(c, cfg);
    match count {
        IonCount::Fixed => mean.round() as usize,
        IonCount::Poisson if mean > 0.0 => match Poisson::new(mean) {
            Ok(d) => d.sample(rng) as usize,
            Err(_) => mean.round() as usize,
        },
        IonCount::Poisson => 0,
    }
}

fn check_concentration(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("concentration must be positive and finite"));
    }
    Ok(())
}

/// Ion configuration for Monte Carlo trial `trial`.
///
/// Radii follow `p(b) ~ b^2` on `[r_nd, R]` (inverse CDF), directions are
/// uniform on the sphere and charges are `+-1 e` with equal probability.
pub fn sample_ions_trial(
    c: f64,
    cfg: &DielectricConfig,
    seed: u64,
    trial: u64,
    count: IonCount,
) -> Result<IonConfiguration> {
    check_concentration(c)?;
    cfg.validate()?;
    let mut rng = rng::stream(seed, Domain::IonPlacement, trial);
    let n = trial_count(&mut rng, c, cfg, count);
    if n == 0 {
        log::warn!("concentration {c} mol/m^3 gives no ions in the shell; returning an empty configuration");
    }
    let r3 = cfg.r_nd.powi(3);
    let span3 = cfg.shell_radius.powi(3) - r3;
    let ions = (0..n).map(|_| sample_one(&mut rng, r3, span3, cfg)).collect();
    Ok(IonConfiguration { ions, concentration: c, seed })
}

/// Ion configuration for concentration `c` (mol/m^3) with a fixed ion count.
pub fn sample_ions(c: f64, cfg: &DielectricConfig, seed: u64) -> Result<IonConfiguration> {
    sample_ions_trial(c, cfg, seed, 0, IonCount::Fixed)
}

/// Superposition of [`single_ion_field`] over all ions.
pub fn total_field(config: &IonConfiguration, cfg: &DielectricConfig) -> Result<FieldVector> {
    let mut e = FieldVector::ZERO;
    for ion in &config.ions {
        e += single_ion_field(ion, cfg)?;
    }
    Ok(e)
}

/// Total field of trial `trial` without materialising the ion list.
/// Bit-identical to `total_field(&sample_ions_trial(..))`.
pub fn trial_field(c: f64, cfg: &DielectricConfig, seed: u64, trial: u64, count: IonCount) -> Result<FieldVector> {
    check_concentration(c)?;
    cfg.validate()?;
    let mut rng = rng::stream(seed, Domain::IonPlacement, trial);
    let n = trial_count(&mut rng, c, cfg, count);
    let r3 = cfg.r_nd.powi(3);
    let span3 = cfg.shell_radius.powi(3) - r3;
    let pref = cfg.field_prefactor();
    let mut e = FieldVector::ZERO;
    for _ in 0..n {
        let ion = sample_one(&mut rng, r3, span3, cfg);
        e += ion_field_unchecked(ion.charge as f64, ion.position, ion.position.norm_squared(), pref);
    }
    Ok(e)
}

/// How the field of one Monte Carlo trial is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMethod {
    /// Every ion is placed and its field summed.
    Direct,
    /// Ions are counted into `bins` equal-volume radial shells with
    /// multinomial counts. A shell holding more than [`BINNED_EXPLICIT_LIMIT`]
    /// ions contributes a Gaussian vector whose per-component variance is
    /// `n K^2 <b^-4>_shell / 3`, the sum of `n` isotropic single-ion fields;
    /// sparser shells are sampled ion by ion.
    Binned { bins: usize },
    /// [`SamplingMethod::Direct`] up to [`DIRECT_ION_LIMIT`] ions per trial,
    /// 1024-shell [`SamplingMethod::Binned`] above.
    #[default]
    Auto,
}

/// Largest ion count summed ion by ion under [`SamplingMethod::Auto`].
pub const DIRECT_ION_LIMIT: usize = 200_000;
/// Shells with at most this many ions are sampled explicitly when binning.
pub const BINNED_EXPLICIT_LIMIT: u64 = 64;

/// Total field of trial `trial` using `method`.
pub fn trial_field_with(
    c: f64,
    cfg: &DielectricConfig,
    seed: u64,
    trial: u64,
    count: IonCount,
    method: SamplingMethod,
) -> Result<FieldVector> {
    let bins = match method {
        SamplingMethod::Direct => return trial_field(c, cfg, seed, trial, count),
        SamplingMethod::Auto if expected_ion_count(c, cfg) <= DIRECT_ION_LIMIT as f64 => {
            return trial_field(c, cfg, seed, trial, count)
        }
        SamplingMethod::Auto => 1024,
        SamplingMethod::Binned { bins } => bins,
    };
    if bins == 0 {
        return Err(Error::invalid("binned sampling needs at least one shell"));
    }
    check_concentration(c)?;
    cfg.validate()?;
    let mut rng = rng::stream(seed, Domain::IonPlacement, trial);
    let mut remaining = trial_count(&mut rng, c, cfg, count) as u64;
    let r3 = cfg.r_nd.powi(3);
    let span3 = cfg.shell_radius.powi(3) - r3;
    let pref = cfg.field_prefactor();
    let mut e = FieldVector::ZERO;
    let mut inner = cfg.r_nd;
    for k in 0..bins {
        let lo3 = r3 + span3 * k as f64 / bins as f64;
        let hi3 = r3 + span3 * (k + 1) as f64 / bins as f64;
        let outer = if k + 1 == bins { cfg.shell_radius } else { hi3.cbrt() };
        let n = if k + 1 == bins {
            remaining
        } else {
            Binomial::new(remaining, 1.0 / (bins - k) as f64)
                .map_err(|_| Error::invalid("invalid multinomial draw"))?
                .sample(&mut rng)
        };
        remaining -= n;
        if n <= BINNED_EXPLICIT_LIMIT {
            let shell = DielectricConfig { r_nd: inner, shell_radius: outer, ..*cfg };
            for _ in 0..n {
                let ion = sample_one(&mut rng, lo3, hi3 - lo3, &shell);
                e += ion_field_unchecked(ion.charge as f64, ion.position, ion.position.norm_squared(), pref);
            }
        } else if outer > inner {
            let mean_b4 = 3.0 * (1.0 / inner - 1.0 / outer) / (hi3 - lo3);
            let sd = pref * (n as f64 * mean_b4 / 3.0).sqrt();
            let g = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            };
            e += FieldVector::new(g(&mut rng), g(&mut rng), g(&mut rng));
        }
        inner = outer;
    }
    Ok(e)
}

/// Per-component mean and sample standard deviation of a set of field samples.
pub fn field_stats_from_samples(samples: &[FieldVector]) -> Result<FieldStats> {
    if samples.is_empty() {
        return Err(Error::invalid("at least one trial is required"));
    }
    let comp = |f: fn(&FieldVector) -> f64| {
        let v: Vec<f64> = samples.iter().map(f).collect();
        stats::mean_std(&v)
    };
    let (mx, sx) = comp(|e| e.x);
    let (my, sy) = comp(|e| e.y);
    let (mz, sz) = comp(|e| e.z);
    Ok(FieldStats { mean: FieldVector::new(mx, my, mz), std: FieldVector::new(sx, sy, sz), trials: samples.len() })
}

/// Monte Carlo field statistics over `trials` independent configurations,
/// with a fixed ion count and [`SamplingMethod::Auto`].
///
/// A single trial yields `std = 0`; callers should treat it as unusable.
pub fn field_stats_mc(c: f64, cfg: &DielectricConfig, trials: usize, seed: u64) -> Result<FieldStats> {
    field_stats_mc_with(c, cfg, trials, seed, IonCount::Fixed, SamplingMethod::Auto)
}

pub fn field_stats_mc_with(
    c: f64,
    cfg: &DielectricConfig,
    trials: usize,
    seed: u64,
    count: IonCount,
    method: SamplingMethod,
) -> Result<FieldStats> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let samples =
        (0..trials as u64).map(|t| trial_field_with(c, cfg, seed, t, count, method)).collect::<Result<Vec<_>>>()?;
    field_stats_from_samples(&samples)
}

/// Prefactor `A = |q| / (eps0 (2 eps_e + eps_nd)) * sqrt(3 N_A / (4 pi))` for `|q| = e`.
pub fn coefficient_a(cfg: &DielectricConfig) -> f64 {
    ELEMENTARY_CHARGE / (VACUUM_PERMITTIVITY * (2.0 * cfg.eps_e + cfg.eps_nd)) * (3.0 * AVOGADRO / (4.0 * PI)).sqrt()
}

/// Closed-form standard deviation (V/m) of each field component at
/// concentration `c` (mol/m^3).
pub fn sigma_closed_form(c: f64, cfg: &DielectricConfig) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::invalid("concentration must be non-negative"));
    }
    Ok(coefficient_a(cfg) * (c * cfg.radial_factor()).sqrt())
}

/// Inverse of [`sigma_closed_form`]: concentration (mol/m^3) from `sigma` (V/m).
pub fn concentration_from_sigma(sigma: f64, cfg: &DielectricConfig) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid("sigma must be non-negative"));
    }
    let k = cfg.radial_factor();
    if !(k > 0.0) {
        return Err(Error::domain("an empty shell (R = r_nd) carries no concentration information"));
    }
    let ratio = sigma / coefficient_a(cfg);
    Ok(ratio * ratio / k)
}

/// Fitted prefactor of the square-root law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtLawFit {
    pub a: f64,
    pub stderr: f64,
}

/// Least-squares `A` in `sigma_i = A sqrt(c_i k)`, `k = 1/r_nd - 1/R`.
///
/// The model is linear in `A`, so the estimate is closed form:
/// `A = sum(x y) / sum(x^2)` with `x = sqrt(c k)`.
pub fn fit_sqrt_law(points: &[(f64, f64)], cfg: &DielectricConfig) -> Result<SqrtLawFit> {
    if points.len() < 2 {
        return Err(Error::fit("at least two (c, sigma) points are required"));
    }
    let c0 = points[0].0;
    if points.iter().all(|p| p.0 == c0) {
        return Err(Error::fit("all concentrations are equal"));
    }
    if points.iter().any(|p| !(p.0 >= 0.0) || !p.1.is_finite()) {
        return Err(Error::fit("concentrations must be non-negative and sigmas finite"));
    }
    let k = cfg.radial_factor();
    let xs: Vec<f64> = points.iter().map(|p| (p.0 * k).sqrt()).collect();
    let sxx = stats::pairwise_sum(&xs.iter().map(|x| x * x).collect::<Vec<_>>());
    let sxy = stats::pairwise_sum(&xs.iter().zip(points).map(|(x, p)| x * p.1).collect::<Vec<_>>());
    if !(sxx > 0.0) {
        return Err(Error::fit("degenerate design"));
    }
    let a = sxy / sxx;
    let ssr: f64 = xs.iter().zip(points).map(|(x, p)| (p.1 - a * x).powi(2)).sum();
    let dof = (points.len() - 1) as f64;
    Ok(SqrtLawFit { a, stderr: (ssr / dof / sxx).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::units::{MOL_PER_L, NM};
    use alloc::vec;

    fn cfg(r_outer_nm: f64) -> DielectricConfig {
        DielectricConfig::new(17.5, 5.8, 100.0 * NM, r_outer_nm * NM).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_ion_field_reference_value() {
        // q/(4 pi eps0) * 3/40.8 / (200 nm)^2 evaluated independently in f64.
        let expected = 1.602_176_634e-19 / (4.0 * PI * 8.854_187_812_8e-12) * (3.0 / 40.8) / (200e-9f64).powi(2);
        let ion = Ion { charge: 1, position: FieldVector::new(0.0, 0.0, 200.0 * NM) };
        let e = single_ion_field(&ion, &cfg(400.0)).unwrap();
        assert_eq!(e.x, 0.0);
        assert_eq!(e.y, 0.0);
        assert!(rel(e.z, expected) < 1e-14);
        assert!((e.z - 2.647e3).abs() < 0.5);
    }

    #[test]
    fn single_ion_field_is_odd_and_reduces_to_coulomb() {
        let c = cfg(400.0);
        let p = FieldVector::new(30.0 * NM, -120.0 * NM, 170.0 * NM);
        let a = single_ion_field(&Ion { charge: 1, position: p }, &c).unwrap();
        let b = single_ion_field(&Ion { charge: 1, position: -p }, &c).unwrap();
        assert_eq!(a, -b);

        let vac = DielectricConfig::new(1.0, 1.0, 100.0 * NM, 400.0 * NM).unwrap();
        let ion = Ion { charge: 1, position: FieldVector::new(0.0, 250.0 * NM, 0.0) };
        let coulomb = ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY * (250e-9f64).powi(2));
        assert!(rel(single_ion_field(&ion, &vac).unwrap().y, coulomb) < 1e-14);
    }

    #[test]
    fn single_ion_field_scaling() {
        let c = cfg(400.0);
        let dir = FieldVector::new(0.3, -0.5, 0.8);
        let dir = dir * (1.0 / dir.norm());
        let e1 = single_ion_field(&Ion { charge: 1, position: dir * (150.0 * NM) }, &c).unwrap();
        let e2 = single_ion_field(&Ion { charge: 1, position: dir * (300.0 * NM) }, &c).unwrap();
        assert!(rel(e1.norm() / e2.norm(), 4.0) < 1e-12);
        let e3 = single_ion_field(&Ion { charge: -2, position: dir * (150.0 * NM) }, &c).unwrap();
        assert!(rel(e3.z, -2.0 * e1.z) < 1e-14);
    }

    #[test]
    fn single_ion_inside_is_domain_error() {
        let ion = Ion { charge: 1, position: FieldVector::new(0.0, 0.0, 50.0 * NM) };
        assert!(matches!(single_ion_field(&ion, &cfg(400.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn potential_at_centre_is_monopole() {
        let c = cfg(400.0);
        let b = 200.0 * NM;
        for theta in [0.0, 0.7, 2.0, PI] {
            let phi = potential_series(0.0, theta, b, ELEMENTARY_CHARGE, &c, 30).unwrap();
            let expect = ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY * 17.5 * b);
            assert!(rel(phi, expect) < 1e-14);
        }
    }

    #[test]
    fn potential_gradient_matches_centre_field() {
        let c = cfg(400.0);
        let b = 200.0 * NM;
        let h = 1e-3 * c.r_nd;
        // Ion on +z: theta = 0 points towards it.
        let up = potential_series(h, 0.0, b, ELEMENTARY_CHARGE, &c, 50).unwrap();
        let down = potential_series(h, PI, b, ELEMENTARY_CHARGE, &c, 50).unwrap();
        let grad = (up - down) / (2.0 * h);
        let ion = Ion { charge: 1, position: FieldVector::new(0.0, 0.0, b) };
        let e = single_ion_field(&ion, &c).unwrap();
        assert!(rel(grad, e.z) < 1e-6, "grad {grad} field {}", e.z);
    }

    #[test]
    fn potential_equal_permittivities_is_coulomb() {
        let c = DielectricConfig::new(17.5, 17.5, 100.0 * NM, 400.0 * NM).unwrap();
        let (r, theta, b) = (40.0 * NM, 1.1, 180.0 * NM);
        let phi = potential_series(r, theta, b, ELEMENTARY_CHARGE, &c, 80).unwrap();
        let dist = (r * r + b * b - 2.0 * r * b * theta.cos()).sqrt();
        let expect = ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY * 17.5 * dist);
        assert!(rel(phi, expect) < 1e-12);
    }

    #[test]
    fn potential_series_converges() {
        let c = cfg(400.0);
        let b = 100.0 * NM;
        for &(r, theta) in &[(10.0 * NM, 0.3), (50.0 * NM, 0.0), (50.0 * NM, 2.5)] {
            let p40 = potential_series(r, theta, b, ELEMENTARY_CHARGE, &c, 40).unwrap();
            let p60 = potential_series(r, theta, b, ELEMENTARY_CHARGE, &c, 60).unwrap();
            assert!((p60 - p40).abs() / p60.abs() < 1e-8);
        }
    }

    #[test]
    fn potential_outside_is_domain_error() {
        let c = cfg(400.0);
        assert!(potential_series(100.0 * NM, 0.0, 200.0 * NM, ELEMENTARY_CHARGE, &c, 5).is_err());
    }

    #[test]
    fn legendre_known_values() {
        let p = legendre_all(4, 0.5);
        assert!((p[2] - (-0.125)).abs() < 1e-15);
        assert!((p[3] - (-0.4375)).abs() < 1e-15);
        assert!((p[4] - (-0.2890625)).abs() < 1e-15);
    }

    #[test]
    fn one_ion_configuration_and_determinism() {
        let c = cfg(400.0);
        let conc = 1.0 / (AVOGADRO * c.shell_volume());
        let conf = sample_ions(conc, &c, 11).unwrap();
        assert_eq!(conf.ions.len(), 1);
        let b = conf.ions[0].position.norm();
        assert!(b >= c.r_nd && b <= c.shell_radius);
        assert_eq!(sample_ions(conc * 50.0, &c, 5).unwrap(), sample_ions(conc * 50.0, &c, 5).unwrap());
    }

    #[test]
    fn empty_configuration_for_tiny_concentration() {
        let conf = sample_ions(1e-12, &cfg(400.0), 1).unwrap();
        assert!(conf.ions.is_empty());
        assert!(sample_ions(0.0, &cfg(400.0), 1).is_err());
    }

    #[test]
    fn poisson_count_varies_around_mean() {
        let c = cfg(400.0);
        let conc = 100.0 / (AVOGADRO * c.shell_volume());
        let counts: Vec<f64> =
            (0..200).map(|t| sample_ions_trial(conc, &c, 3, t, IonCount::Poisson).unwrap().ions.len() as f64).collect();
        let (m, s) = stats::mean_std(&counts);
        assert!((m - 100.0).abs() < 3.0 * 10.0 / (200f64).sqrt());
        assert!(s > 5.0 && s < 15.0);
    }

    #[test]
    fn trial_field_matches_materialised_sum() {
        let c = cfg(400.0);
        let conf = sample_ions_trial(5.0, &c, 9, 4, IonCount::Fixed).unwrap();
        assert_eq!(total_field(&conf, &c).unwrap(), trial_field(5.0, &c, 9, 4, IonCount::Fixed).unwrap());
    }

    #[test]
    fn symmetric_pair_cancels() {
        let c = cfg(400.0);
        let conf = IonConfiguration {
            ions: vec![
                Ion { charge: 1, position: FieldVector::new(0.0, 0.0, 150.0 * NM) },
                Ion { charge: 1, position: FieldVector::new(0.0, 0.0, -150.0 * NM) },
            ],
            concentration: 1.0,
            seed: 0,
        };
        assert_eq!(total_field(&conf, &c).unwrap(), FieldVector::ZERO);
    }

    #[test]
    fn coefficient_a_reference_value() {
        let a = coefficient_a(&cfg(400.0));
        // e / (eps0 * 40.8) * sqrt(3 N_A / 4 pi), evaluated by hand in f64.
        let expect = 1.602_176_634e-19 / (8.854_187_812_8e-12 * 40.8) * (3.0 * 6.022_140_76e23 / (4.0 * PI)).sqrt();
        assert!(rel(a, expect) < 1e-14);
        assert!((a - 168.1).abs() < 0.1);
    }

    #[test]
    fn sigma_closed_form_values() {
        let c = cfg(500.0);
        let s = sigma_closed_form(1000.0, &c).unwrap();
        assert!(rel(s, 1.50e7) < 0.01);
        assert_eq!(
            sigma_closed_form(1000.0, &DielectricConfig::new(17.5, 5.8, 100.0 * NM, 100.0 * NM).unwrap()).unwrap(),
            0.0
        );
        let s1 = sigma_closed_form(0.3, &c).unwrap();
        let s4 = sigma_closed_form(1.2, &c).unwrap();
        assert!(rel(s4, 2.0 * s1) < 1e-15);
        let ratio = sigma_closed_form(500.0, &cfg(500.0)).unwrap() / sigma_closed_form(500.0, &cfg(400.0)).unwrap();
        assert!((ratio - 1.033).abs() < 0.001);
    }

    #[test]
    fn concentration_inverse() {
        let c = cfg(500.0);
        for conc in [0.1, 3.0, 250.0, 1000.0, 4.2e3] {
            let back = concentration_from_sigma(sigma_closed_form(conc, &c).unwrap(), &c).unwrap();
            assert!(rel(back, conc) < 1e-12);
        }
        assert_eq!(concentration_from_sigma(0.0, &c).unwrap(), 0.0);
        assert!(rel(concentration_from_sigma(1.50e7, &c).unwrap(), 1000.0) < 0.01);
    }

    #[test]
    fn sqrt_law_fit_exact_and_degenerate() {
        let c = cfg(400.0);
        let pts: Vec<(f64, f64)> = [0.1, 0.25, 0.5, 1.0]
            .iter()
            .map(|&m| (m * MOL_PER_L, sigma_closed_form(m * MOL_PER_L, &c).unwrap()))
            .collect();
        let fit = fit_sqrt_law(&pts, &c).unwrap();
        assert!(rel(fit.a, coefficient_a(&c)) < 1e-10);
        assert!(fit.stderr < 1e-10 * fit.a);
        assert!(fit_sqrt_law(&[(100.0, 1.0), (100.0, 1.1)], &c).is_err());
        assert!(fit_sqrt_law(&[(100.0, 1.0)], &c).is_err());
    }

    #[test]
    fn mc_std_close_to_closed_form() {
        let c = cfg(400.0);
        let conc = 0.5 * MOL_PER_L;
        let st = field_stats_mc(conc, &c, 500, 2024).unwrap();
        let sigma = sigma_closed_form(conc, &c).unwrap();
        assert!(rel(st.std.z, sigma) < 0.10, "{} vs {}", st.std.z, sigma);
        for m in st.mean.to_array() {
            assert!(m.abs() < 3.0 * sigma / (500f64).sqrt());
        }
    }

    #[test]
    fn direct_sampling_matches_closed_form_at_moderate_count() {
        let c = cfg(400.0);
        let conc = 2e-4 * MOL_PER_L;
        assert!(expected_ion_count(conc, &c) < 40_000.0);
        let st = field_stats_mc_with(conc, &c, 400, 5, IonCount::Fixed, SamplingMethod::Direct).unwrap();
        let sigma = sigma_closed_form(conc, &c).unwrap();
        for s in st.std.to_array() {
            assert!(rel(s, sigma) < 0.12, "{s} vs {sigma}");
        }
    }

    #[test]
    fn binned_sampling_agrees_with_direct() {
        let c = cfg(400.0);
        let conc = 2e-4 * MOL_PER_L;
        let d = field_stats_mc_with(conc, &c, 400, 11, IonCount::Fixed, SamplingMethod::Direct).unwrap();
        let b = field_stats_mc_with(conc, &c, 400, 11, IonCount::Fixed, SamplingMethod::Binned { bins: 64 }).unwrap();
        // Explicit placement in every shell: many bins, few ions each.
        let e = field_stats_mc_with(conc, &c, 400, 11, IonCount::Fixed, SamplingMethod::Binned { bins: 4096 }).unwrap();
        let pooled = |s: &FieldStats| (s.std.norm_squared() / 3.0).sqrt();
        assert!(rel(pooled(&b), pooled(&d)) < 0.1);
        assert!(rel(pooled(&e), pooled(&d)) < 0.1);
        assert!(trial_field_with(conc, &c, 1, 0, IonCount::Fixed, SamplingMethod::Binned { bins: 0 }).is_err());
    }

    #[test]
    fn auto_sampling_switches_on_ion_count() {
        let c = cfg(400.0);
        let small = 1e-5 * MOL_PER_L;
        let a = trial_field_with(small, &c, 3, 4, IonCount::Fixed, SamplingMethod::Auto).unwrap();
        assert_eq!(a, trial_field(small, &c, 3, 4, IonCount::Fixed).unwrap());
        let big = 1.0 * MOL_PER_L;
        let a = trial_field_with(big, &c, 3, 4, IonCount::Fixed, SamplingMethod::Auto).unwrap();
        let b = trial_field_with(big, &c, 3, 4, IonCount::Fixed, SamplingMethod::Binned { bins: 1024 }).unwrap();
        assert_eq!(a, b);
    }
}
