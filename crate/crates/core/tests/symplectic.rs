mod common;

use bse_lobpcg::linalg::RMat;
use bse_lobpcg::problems::{
    gen_known_spectrum_spd, orthosymplectic_from_unitary, random_unitary, symplectic_defect, symplectic_shear,
    ProblemData,
};
use bse_lobpcg::symplectic::{bsh_to_spd, phi_to_symplectic, trace_min_check};
use bse_lobpcg::{dense_bse_solve, spd_to_bsh, symplectic_eigensolve, williamson_dense, PreconditionerKind, SolverConfig};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn positive_spectrum_is_symplectic_spectrum(n in 1usize..20, seed in any::<u64>()) {
        let m = random_spd(n, seed);
        let p = spd_to_bsh(&m).unwrap();
        let ours = oracle_positive_spectrum(&p);
        let truth = oracle_symplectic(&m);
        prop_assert!(rel_err(&ours, &truth) <= 1e-11);
        let back = bsh_to_spd(&p);
        prop_assert!((back - &m).abs().max() <= 1e-12 * m.abs().max());
    }

    #[test]
    fn williamson_is_congruence_invariant(n in 2usize..12, seed in any::<u64>()) {
        let m = random_spd(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = orthosymplectic_from_unitary(&random_unitary(n, &mut rng));
        let l = symplectic_shear(n, 1 + (seed as usize) % n, 1.3, -0.7).unwrap();
        let s = &k * &l;
        prop_assert!(symplectic_defect(&s) <= 1e-12 * s.abs().max().powi(2));
        let a = williamson_dense(&m).unwrap();
        let b = williamson_dense(&(s.transpose() * &m * &s)).unwrap();
        prop_assert!(rel_err(&b.lambda, &a.lambda) <= 1e-9);
    }
}

#[test]
fn dense_williamson_form_is_symplectic_and_diagonalizing() {
    let m = random_spd(6, 3);
    let w = williamson_dense(&m).unwrap();
    let s = &w.s_matrix;
    assert!(symplectic_defect(s) <= 1e-11);
    let d = s.transpose() * &m * s;
    for i in 0..6 {
        assert!((d[(i, i)] - w.lambda[i]).abs() <= 1e-10 * w.lambda[i]);
        assert!((d[(6 + i, 6 + i)] - w.lambda[i]).abs() <= 1e-10 * w.lambda[i]);
    }
    assert!(rel_err(&w.lambda, &oracle_symplectic(&m)) <= 1e-11);
}

#[test]
fn iterative_solution_satisfies_the_trace_identity() {
    for seed in 0..6u64 {
        let m = random_spd(16, seed);
        let cfg = SolverConfig::new(3).with_tol(1e-12).with_seed(seed);
        let r = symplectic_eigensolve(&m, &cfg, PreconditionerKind::DiagA).unwrap();
        assert!(r.converged);
        assert!(rel_err(&r.lambda, &oracle_symplectic(&m)[..3]) <= 1e-10);
        assert!(r.diagnostics.trace <= 1e-9);
        assert!(r.diagnostics.j_orthogonality <= 1e-10);
        // s_i^T J s_{l+i} = 1 and the largest entry of s_i is positive
        let s = &r.s_block;
        let n = 16;
        for i in 0..3 {
            let (a, b) = (s.column(i), s.column(3 + i));
            let jb: Vec<f64> = (0..2 * n).map(|r| if r < n { b[n + r] } else { -b[r - n] }).collect();
            let v: f64 = a.iter().zip(&jb).map(|(x, y)| x * y).sum();
            assert!((v - 1.0).abs() <= 1e-10);
            let big = a.iter().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { *x } else { acc });
            assert!(big > 0.0);
        }
    }
}

#[test]
fn trace_is_minimal_on_eigenvectors() {
    let m = random_spd(10, 1);
    let p = spd_to_bsh(&m).unwrap();
    let spec = dense_bse_solve(&p).unwrap();
    let z = spec.eigvecs.blocks(0, 4);
    assert!(trace_min_check(&p, &z).unwrap() <= 1e-9 * spec.lambda_plus[..4].iter().sum::<f64>());
    let s = phi_to_symplectic(&z);
    assert_eq!(s.shape(), (20, 8));
}

#[test]
fn known_spectrum_generator() {
    for n in [5usize, 10, 25] {
        let g = gen_known_spectrum_spd(n, 2).unwrap();
        let ProblemData::Spd(m) = &g.data else { panic!() };
        assert!(m.clone().cholesky().is_some());
        assert!((m - m.transpose()).abs().max() == 0.0);
        let truth: Vec<f64> = (1..=n).map(|v| v as f64).collect();
        assert_eq!(g.ground_truth.as_ref().unwrap(), &truth);
        assert!(rel_err(&oracle_symplectic(m), &truth) <= 1e-9);
    }
    assert!(spd_to_bsh(&RMat::identity(3, 3)).is_err());
}
