use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use hempss_core::canonical::{residual_nlcc1, validate, CanonicalBranch, CanonicalParams};
use hempss_core::fock::{exp_apply, make_mode_operators, FockCutoff, FockOperator, FockState};
use hempss_core::hamiltonian::{generic_coefficients, specialized_coefficients};
use hempss_core::linalg::BandLu;
use hempss_core::processes::{
    enumerate_orders, pump_design_four_photon, splitting_conditions, EnumerateOptions, PumpSet,
};
use hempss_core::states::{overlap_fock_z, wave_params, HeterodynePoint};
use hempss_core::statistics::{gauss_legendre, laguerre, pnd, QuadratureConfig, Rule};
use hempss_core::{wrap_angle, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn branch() -> impl Strategy<Value = CanonicalBranch> {
    prop_oneof![Just(CanonicalBranch::DeltaZero_ThetaPi), Just(CanonicalBranch::DeltaPi_ThetaZero)]
}

prop_compose! {
    fn canonical()(b in branch(), r in 0.0..2.0f64, phi in 0.0..2.0 * PI, g in 0.0..0.5f64,
                   d1 in 0.0..2.0 * PI, t1 in 0.0..2.0 * PI) -> CanonicalParams {
        CanonicalParams::on_branch(b, r, phi, g, d1, t1, 2)
    }
}

fn to_matrix(op: &FockOperator) -> DMatrix<C64> {
    let n = op.dim();
    DMatrix::from_row_slice(n, n, &op.to_dense())
}

fn random_state(cutoff: FockCutoff, seed: &[f64]) -> FockState {
    let amps = (0..cutoff.dim())
        .map(|k| C64::new(seed[k % seed.len()] + 0.1 * k as f64, seed[(k + 1) % seed.len()]))
        .collect();
    FockState::from_amplitudes(cutoff, amps).unwrap().normalized()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branches_are_canonical(p in canonical()) {
        prop_assert!(residual_nlcc1(&p).norm() < 1e-12);
        let mu = p.mu();
        let nu = p.nu();
        prop_assert!((mu.norm_sqr() - nu.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(validate(&p, 1e-9).pass);
    }

    #[test]
    fn wrapped_angles_stay_in_range(x in -100.0..100.0f64) {
        let y = wrap_angle(x);
        prop_assert!((0.0..2.0 * PI).contains(&y));
        let k = ((x - y) / (2.0 * PI)).round();
        prop_assert!((x - y - 2.0 * PI * k).abs() < 1e-9);
    }

    #[test]
    fn specialized_table_matches_generic(r in 0.0..2.0f64, phi in 0.0..2.0 * PI, g in 0.0..0.5f64,
                                         d1 in 0.0..2.0 * PI, t1 in 0.0..2.0 * PI) {
        let p = CanonicalParams::on_branch(CanonicalBranch::DeltaZero_ThetaPi, r, phi, g, d1, t1, 2);
        let gen = generic_coefficients(&p).unwrap();
        prop_assert!(gen.max_diff(&specialized_coefficients(&p).unwrap()) < 1e-12);
        prop_assert!((gen.D4.norm() - 0.5 * g * g).abs() < 1e-14);
    }

    #[test]
    fn phases_shift_the_wavefunction_only_through_gamma(p in canonical(), b1r in -2.0..2.0f64, b2i in -2.0..2.0f64) {
        // Γ_i scales linearly with β_i
        let z = C64::new(0.0, 0.0);
        let w0 = wave_params(&p, z, z).unwrap();
        let w = wave_params(&p, C64::new(b1r, 0.0), C64::new(0.0, b2i)).unwrap();
        prop_assert_eq!(w0.a, w.a);
        prop_assert_eq!(w0.wb1, w.wb1);
        let w2 = wave_params(&p, C64::new(2.0 * b1r, 0.0), C64::new(0.0, 2.0 * b2i)).unwrap();
        prop_assert!((w2.gamma1 - 2.0 * w.gamma1).norm() < 1e-12 * (1.0 + w.gamma1.norm()));
        prop_assert!((w2.gamma2 - 2.0 * w.gamma2).norm() < 1e-12 * (1.0 + w.gamma2.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ladder_algebra_below_the_edge(n in 3usize..12) {
        let c = FockCutoff::square(n).unwrap();
        let (a1, a2) = make_mode_operators(c).unwrap();
        let comm = a1.commutator(&a1.adjoint()).unwrap().sub(&FockOperator::identity(c)).unwrap();
        prop_assert!(comm.projected_inf_norm(n - 1) < 1e-14);
        prop_assert!(a1.commutator(&a2).unwrap().max_abs() < 1e-14);
        prop_assert!(a1.adjoint().adjoint().max_abs_diff(&a1).unwrap() == 0.0);
    }

    #[test]
    fn exp_apply_matches_dense_exponential(re in -0.8..0.8f64, im in -0.8..0.8f64, seed in prop::collection::vec(-1.0..1.0f64, 4)) {
        let c = FockCutoff::new(6, 5).unwrap();
        let (a1, a2) = make_mode_operators(c).unwrap();
        let al = C64::new(re, im);
        // anti-Hermitian: displacement of mode 1 plus a two-mode squeezing term
        let gen = FockOperator::linear_combination(&[
            (al, &a1.adjoint()),
            (-al.conj(), &a1),
            (C64::new(0.3, 0.1), &a1.adjoint().compose(&a2.adjoint()).unwrap()),
            (C64::new(-0.3, 0.1), &a1.compose(&a2).unwrap()),
        ]).unwrap();
        let v = random_state(c, &seed);
        let out = exp_apply(&gen, &v, 1e-14).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let dense = to_matrix(&gen).exp();
        let x = nalgebra::DVector::from_column_slice(v.amplitudes());
        let y = dense * x;
        let err = y.iter().zip(out.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11, "{}", err);
        let back = exp_apply(&gen.scale(C64::new(-1.0, 0.0)), &out, 1e-14).unwrap();
        let diff = back.amplitudes().iter().zip(v.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-11);
    }

    #[test]
    fn band_solver_matches_dense_lu(shift in 0.1..3.0f64, seed in prop::collection::vec(-1.0..1.0f64, 4)) {
        let c = FockCutoff::square(5).unwrap();
        let (a1, a2) = make_mode_operators(c).unwrap();
        let k = FockOperator::linear_combination(&[
            (C64::new(1.0, 0.0), &a1),
            (C64::new(0.4, 0.2), &a2.adjoint()),
            (C64::new(-shift, 0.0), &FockOperator::identity(c)),
        ]).unwrap();
        let m = k.adjoint().compose(&k).unwrap().add(&FockOperator::identity(c).scale(C64::new(0.01, 0.0))).unwrap();
        let b = random_state(c, &seed);
        let mut x = b.amplitudes().to_vec();
        BandLu::factor(&m).solve_in_place(&mut x);
        let want = to_matrix(&m).lu().solve(&nalgebra::DVector::from_column_slice(b.amplitudes())).unwrap();
        let err = want.iter().zip(&x).map(|(a, b)| (a - b).norm() / a.norm().max(1.0)).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "{}", err);
    }

    #[test]
    fn fock_overlaps_are_normalized(n1 in 0usize..8, n2 in 0usize..8, t1 in 0.0..2.0 * PI, t2 in 0.0..2.0 * PI) {
        // (2/π)∫|⟨n|z⟩|² d²z = 1
        let q = QuadratureConfig { half_extent: 6.0, points_per_axis: 64, rule: Rule::Polar, convergence_rel_tol: 1e-6 };
        let total: f64 = q.nodes().into_iter()
            .map(|(z, w)| w * overlap_fock_z(n1, n2, HeterodynePoint { z }, t1, t2).norm_sqr())
            .sum::<f64>() * 2.0 / PI;
        prop_assert!((total - 1.0).abs() < 1e-10, "{}", total);
    }

    #[test]
    fn laguerre_matches_explicit_sum(m in 0usize..10, alpha in 0usize..6, x in 0.0..20.0f64) {
        // L_m^α(x) = Σ_i (−1)^i C(m+α, m−i) x^i / i!
        let mut want = 0.0;
        for i in 0..=m {
            let mut binom = 1.0;
            for j in 0..(m - i) {
                binom *= (m + alpha - j) as f64 / (j + 1) as f64;
            }
            let mut term = binom;
            for j in 1..=i {
                term *= x / j as f64;
            }
            want += if i % 2 == 0 { term } else { -term };
        }
        prop_assert!((laguerre(m, alpha, x) - want).abs() < 1e-9 * (1.0 + want.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn balanced_phases_give_exchange_symmetric_pnd(r in 0.2..1.0f64, g in 0.0..0.15f64, beta in 0.0..2.0f64) {
        let p = CanonicalParams::new(r, 0.0, g, g, FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 2);
        let b = C64::new(beta, 0.0);
        let w = hempss_core::states::normalize_analytic(&wave_params(&p, b, b).unwrap()).unwrap();
        let grid = pnd(&w, &p, 16, &QuadratureConfig::for_state(&w)).unwrap();
        prop_assert!(grid.asymmetry() < 1e-10, "{}", grid.asymmetry());
        prop_assert!(grid.total_mass <= 1.0 + 1e-9);
    }
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    let (x, w) = gauss_legendre(12);
    for deg in 0..24u32 {
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
        let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg + 1) as f64 };
        assert!((got - want).abs() < 1e-13, "degree {deg}");
    }
}

#[test]
fn enumerated_terms_balance_and_fill_the_order() {
    let omega = (1.0, SQRT_2);
    let pumps = pump_design_four_photon(omega.0, omega.1).unwrap();
    let terms = enumerate_orders(&[2, 3, 4, 5], omega, &pumps, &EnumerateOptions::default()).unwrap();
    assert!(!terms.is_empty());
    for t in &terms {
        assert!(t.energy_mismatch(omega, &pumps).abs() < 1e-9);
        let modes = t.j + t.s + t.l + t.m;
        let fields = if t.order == 2 { modes + 1 } else { modes + t.pumps.len() as u32 };
        assert_eq!(fields, t.order + 1, "{t:?}");
        assert!(t.j + t.s >= t.l + t.m);
    }
    assert!(terms.windows(2).all(|w| w[0].exponents() <= w[1].exponents()));
    let empty = PumpSet { pumps: vec![], pairs: vec![] };
    let none = enumerate_orders(&[2, 4, 5], omega, &empty, &EnumerateOptions::default()).unwrap();
    assert!(none.is_empty());
}

#[test]
fn splitting_shapes_cover_all_fields() {
    for n in 2..=5 {
        for rel in splitting_conditions(n).unwrap() {
            assert!(!rel.lhs.is_empty() && !rel.rhs.is_empty());
            assert_eq!(rel.lhs.len() + rel.rhs.len(), n as usize + 1);
            assert!(rel.lhs.len() <= rel.rhs.len());
        }
    }
}
