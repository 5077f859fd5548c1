//! Cross-checks against independent references and structural invariants.

use proptest::prelude::*;
use rabi_core::eigensolver::{converge_ground_state, dense_eigh, solve_sectors, SolverKind, DEFAULT_SEED};
use rabi_core::model::{build_dicke_hamiltonian, build_operator, build_rabi_hamiltonian, OperatorKind};
use rabi_core::observables::SignOperator;
use rabi_core::{ModelSpec, TruncationConfig};

#[test]
fn sign_bilinear_matches_matrix_above_direct_limit() {
    let n_max = 900;
    let s = SignOperator::new(n_max).unwrap();
    let m = s.matrix();
    let y: Vec<f64> = (0..=n_max).map(|i| ((i * 7 % 13) as f64 - 6.0) / (1.0 + i as f64).sqrt()).collect();
    let z: Vec<f64> = (0..=n_max).map(|i| (0.37 * i as f64).sin()).collect();
    let yv = nalgebra::DVector::from_vec(y.clone());
    let zv = nalgebra::DVector::from_vec(z.clone());
    let exact = yv.dot(&(&m * &zv));
    assert!((s.bilinear(&y, &z) - exact).abs() < 1e-11 * exact.abs().max(1.0));
}

#[test]
fn ground_energy_decreases_with_coupling() {
    let trunc = TruncationConfig::default();
    for n_q in [1, 2] {
        let mut prev = f64::INFINITY;
        for k in 0..=12 {
            let spec = ModelSpec::from_ratios(0.05, 0.125 * k as f64, n_q).unwrap();
            let e0 = converge_ground_state(&spec, &trunc, SolverKind::Auto, DEFAULT_SEED).unwrap().record.e0;
            assert!(e0 <= prev + 1e-12, "N = {n_q}, step {k}: {e0} > {prev}");
            prev = e0;
        }
    }
}

#[test]
fn parity_commutes_with_hamiltonian() {
    for n_q in [1, 3] {
        let spec = ModelSpec::from_ratios(0.2, 1.3, n_q).unwrap();
        let h = if n_q == 1 {
            build_rabi_hamiltonian(&spec, 30).unwrap()
        } else {
            build_dicke_hamiltonian(&spec, 30).unwrap()
        };
        let p = build_operator(OperatorKind::Parity, &spec, 30).unwrap();
        assert!(h.commutator_norm(&p).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sector_solvers_agree_with_full_dense(
        ratio in 0.05f64..1.0,
        lambda_rel in 0.0f64..2.0,
        n_q in 1usize..4,
    ) {
        let spec = ModelSpec::from_ratios(ratio, lambda_rel, n_q).unwrap();
        let n_max = 40;
        let h = if n_q == 1 {
            build_rabi_hamiltonian(&spec, n_max).unwrap()
        } else {
            build_dicke_hamiltonian(&spec, n_max).unwrap()
        };
        let full = dense_eigh(&h, false).unwrap().eigenvalues;
        for solver in [SolverKind::Auto, SolverKind::Dense, SolverKind::Lanczos] {
            let merged = solve_sectors(&spec, n_max, 6, solver, false, DEFAULT_SEED).unwrap().merged(6).0;
            for (a, b) in merged.eigenvalues.iter().zip(&full) {
                prop_assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{solver:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ground_observables_stay_in_range(
        ratio in 0.05f64..1.0,
        lambda_rel in 0.0f64..1.8,
        n_q in 1usize..3,
    ) {
        let spec = ModelSpec::from_ratios(ratio, lambda_rel, n_q).unwrap();
        let r = converge_ground_state(&spec, &TruncationConfig::default(), SolverKind::Auto, DEFAULT_SEED)
            .unwrap()
            .record;
        prop_assert!(r.converged);
        prop_assert!(r.entropy_s >= -1e-12 && r.entropy_s <= ((n_q + 1) as f64).log2() + 1e-12);
        prop_assert!(r.corr_c.abs() <= 1.0 + 1e-12);
        prop_assert!(r.squeeze_sp1 > 0.0 && r.squeeze_sp1 <= 1.0 + 1e-9);
        prop_assert!(r.alpha_cond >= 0.0);
        prop_assert!(r.e0 <= -0.5 * n_q as f64 + 1e-12);
        prop_assert!(r.gaps.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}
