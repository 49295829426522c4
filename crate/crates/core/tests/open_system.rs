use nalgebra::{Complex, SMatrix, SVector};
use nvfield_core::constants::NvConstants;
use nvfield_core::constants::TWO_PI;
use nvfield_core::engine::linear_grid;
use nvfield_core::open_system::{
    evolve, fid_ensemble, fid_with_dephasing, hahn_ensemble, hahn_trajectory, Collapse, DensityMatrix, NoiseModel,
    DEFAULT_STEP_FRACTION,
};
use nvfield_core::sequence::Builtin;
use nvfield_core::spin::{build_h0, DriveSettings, NVFrequencies, Operator3, Polarization, StateVector};
use proptest::prelude::*;

type C = Complex<f64>;
const MHZ: f64 = 1e6;

/// Column-stacked Liouvillian of `-i[H, .] + D[L](.)`.
fn liouvillian(h: &Operator3, l: &Operator3) -> SMatrix<C, 9, 9> {
    let m = |op: &Operator3| SMatrix::<C, 3, 3>::from_fn(|i, j| op[(i, j)]);
    let (h, l) = (m(h), m(l));
    let id = SMatrix::<C, 3, 3>::identity();
    let ldl = l.adjoint() * l;
    let mi = C::new(0.0, -1.0);
    let half = C::new(0.5, 0.0);
    id.kronecker(&h) * mi - h.transpose().kronecker(&id) * mi + l.conjugate().kronecker(&l)
        - id.kronecker(&ldl) * half
        - ldl.transpose().kronecker(&id) * half
}

fn oracle(rho: &DensityMatrix, h: &Operator3, gamma: f64, t: f64) -> Operator3 {
    let l = Operator3::s_z().scale(C::new(gamma.sqrt(), 0.0));
    let v = SVector::<C, 9>::from_fn(|k, _| rho.0[(k % 3, k / 3)]);
    let out = (liouvillian(h, &l) * C::new(t, 0.0)).exp() * v;
    let mut op = Operator3::ZERO;
    for k in 0..9 {
        op[(k % 3, k / 3)] = out[k];
    }
    op
}

prop_compose! {
    fn frequencies()(delta in -2.0..2.0, beta in -2.0..2.0, xz in -1.0..1.0, xp in 0.0..3.0, phi in 0.0..TWO_PI) -> NVFrequencies {
        NVFrequencies::new(TWO_PI * delta * MHZ, TWO_PI * beta * MHZ, TWO_PI * xz * MHZ, TWO_PI * xp * MHZ, phi).unwrap()
    }
}

prop_compose! {
    fn state()(a in prop::array::uniform6(-1.0..1.0f64)) -> StateVector {
        let psi = StateVector([C::new(a[0], a[1]), C::new(a[2], a[3]), C::new(a[4], a[5])]);
        let n = psi.norm_squared().sqrt().max(1e-3);
        psi.scale(C::new(1.0 / n, 0.0))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integrator_matches_liouvillian_exponential(f in frequencies(), psi in state(), t2 in 0.3..20.0, t in 0.0..2.0) {
        let rho = DensityMatrix::from_pure(&psi);
        let h = build_h0(&f);
        let gamma = 1.0 / (t2 * 1e-6);
        let t = t * 1e-6;
        let out = evolve(&rho, &h, &[Collapse::dephasing(gamma)], t, DEFAULT_STEP_FRACTION).unwrap();
        prop_assert!(out.0.max_abs_diff(&oracle(&rho, &h, gamma, t)) < 1e-7);
    }

    #[test]
    fn evolution_stays_a_density_matrix(f in frequencies(), psi in state(), t2 in 0.1..20.0, t in 0.0..5.0) {
        let rho = DensityMatrix::from_pure(&psi);
        let out = evolve(&rho, &build_h0(&f), &[Collapse::dephasing(1e6 / t2)], t * 1e-6, DEFAULT_STEP_FRACTION).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-9);
        prop_assert!(out.hermiticity_error() < 1e-9);
        prop_assert!(out.min_eigenvalue() > -1e-9);
        // Dephasing along S_z leaves the populations of a diagonal H untouched.
        let diag = NVFrequencies { xi_perp: 0.0, ..f };
        let out = evolve(&rho, &build_h0(&diag), &[Collapse::dephasing(1e6 / t2)], t * 1e-6, DEFAULT_STEP_FRACTION).unwrap();
        for k in 0..3 {
            prop_assert!((out.population(k) - rho.population(k)).abs() < 1e-9);
        }
    }
}

fn drive() -> DriveSettings {
    DriveSettings::polarized(TWO_PI * 10.0 * MHZ, Polarization::Plus).unwrap()
}

#[test]
fn long_dephasing_settles_at_one_half() {
    let f = NVFrequencies::new(0.0, 0.0, 0.0, TWO_PI * 2.0 * MHZ, 0.3).unwrap();
    let noise = NoiseModel { t2_star: 1e-6, ..Default::default() };
    let taus = linear_grid(10e-6, 101);
    let tr = fid_with_dephasing(&Builtin::FidXiPerp.sequence(), &f, &drive(), &noise, &taus).unwrap();
    assert!(tr.signal[80..].iter().all(|s| (s - 0.5).abs() < 0.01));
}

#[test]
fn ensembles_are_reproducible() {
    let k = NvConstants::default();
    let noise = NoiseModel { field_mean: 1e6, field_std: 0.75e6, trajectories: 4, seed: 11, ..Default::default() };
    let taus = linear_grid(5e-6, 21);
    let a = hahn_ensemble(&noise, &k, &drive(), &taus).unwrap();
    let b = hahn_ensemble(&noise, &k, &drive(), &taus).unwrap();
    assert_eq!(a, b);
    let row = hahn_trajectory(&noise, &k, &drive(), &taus, 2).unwrap();
    assert!(row.iter().all(|s| (0.0..=1.0).contains(s)));
    let other = hahn_ensemble(&NoiseModel { seed: 12, ..noise }, &k, &drive(), &taus).unwrap();
    assert_ne!(a.signal, other.signal);
}

#[test]
fn fid_ensemble_without_spread_matches_static_dephasing() {
    let k = NvConstants::default();
    let e = 2e6;
    let noise = NoiseModel { field_mean: e, t2_star: 3e-6, trajectories: 2, ..Default::default() };
    let taus = linear_grid(2e-6, 9);
    let seq = Builtin::FidXiPerp.sequence();
    let ens = fid_ensemble(&seq, &noise, &k, &drive(), &taus).unwrap();
    let f = k.frequencies(nvfield_core::FieldVector::new(e, e, e), 0.0, k.resonant_drive());
    let direct = fid_with_dephasing(&seq, &f, &drive(), &noise, &taus).unwrap();
    for (a, b) in ens.signal.iter().zip(&direct.signal) {
        assert!((a - b).abs() < 1e-8);
    }
}
