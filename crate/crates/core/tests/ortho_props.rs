mod common;

use bse_lobpcg::linalg::{cr, CMat};
use bse_lobpcg::ortho::{
    c_normalize_block, c_orthonormalize_cgs, omega_orthonormalize, orthogonality_loss, svqb_indefinite, Metric,
    DEFAULT_NEUTRAL_TOL,
};
use bse_lobpcg::problems::gen_ortho_case;
use bse_lobpcg::PhiBlockMatrix;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn two_pass_methods_reach_rounding_level(seed in any::<u64>(), n in 8usize..40, k in 1usize..7) {
        let k = k.min(n);
        let case = gen_ortho_case(n, k, seed, 1e4, 1e8).unwrap();
        for (q, rep) in [
            c_orthonormalize_cgs(&case.u, 2, DEFAULT_NEUTRAL_TOL).unwrap(),
            svqb_indefinite(&case.u, true, DEFAULT_NEUTRAL_TOL).unwrap(),
        ] {
            let bound = 100.0 * U * q.two_norm().powi(2);
            prop_assert!(rep.loss_after <= bound, "{} > {}", rep.loss_after, bound);
            // independent measurement
            prop_assert!(dense_c_loss(&q) <= bound);
            prop_assert!(rep.passes >= 1);
        }
    }

    #[test]
    fn cgs_is_idempotent(seed in any::<u64>(), n in 4usize..30, k in 1usize..5) {
        let k = k.min(n);
        let (q, _) = c_orthonormalize_cgs(&random_phi(n, k, 0.3, seed), 2, DEFAULT_NEUTRAL_TOL).unwrap();
        let (q2, _) = c_orthonormalize_cgs(&q, 2, DEFAULT_NEUTRAL_TOL).unwrap();
        prop_assert!((&q2 - &q).max_abs() <= 1e-13 * q.max_abs().max(1.0));
    }

    #[test]
    fn normalization_swaps_negative_blocks(seed in any::<u64>(), n in 1usize..20) {
        // y dominates, so gamma < 0
        let u = random_phi(n, 1, 1.0, seed);
        let u = PhiBlockMatrix::new(u.x() * cr(0.2), u.y().clone()).unwrap();
        prop_assume!(u.c_norms()[0] < 0.0);
        let b = c_normalize_block(&u, DEFAULT_NEUTRAL_TOL).unwrap();
        let a = b.assemble();
        let first = a.column(0).into_owned();
        let g = dense_c_gram(&CMat::from_columns(&[first.clone()]), &CMat::from_columns(&[first]));
        prop_assert!((g[(0, 0)].re - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn omega_fallback_never_breaks_down(seed in any::<u64>(), n in 2usize..24, k in 1usize..6) {
        // C-neutral columns x = y span at most n dimensions
        let k = k.min(n / 2);
        let p = random_bsh(n, seed);
        let r = random_phi(n, k, 1.0, seed ^ 5);
        let u = PhiBlockMatrix::new(r.x().clone(), r.x().clone()).unwrap();
        let (q, rep) = omega_orthonormalize(&p, &u, None).unwrap();
        prop_assert_eq!(q.k(), k);
        prop_assert!(rep.fallback_used);
        let (loss, _) = orthogonality_loss(&q, Metric::Omega(&p));
        let a = q.assemble();
        let g = a.adjoint() * p.assemble_omega() * &a;
        let id = CMat::identity(2 * k, 2 * k);
        prop_assert!(max_abs(&(g - id)) <= 1e-12);
        prop_assert!(loss <= 1e-12);
    }
}

#[test]
fn small_examples() {
    let neutral = PhiBlockMatrix::new(CMat::from_element(1, 1, cr(1.0)), CMat::from_element(1, 1, cr(1.0))).unwrap();
    assert!(c_normalize_block(&neutral, DEFAULT_NEUTRAL_TOL).is_err());

    let u = random_phi(10, 2, 0.3, 1);
    let dup = PhiBlockMatrix::hcat(&[&u, &u.block(0)]).unwrap();
    assert!(c_orthonormalize_cgs(&dup, 2, DEFAULT_NEUTRAL_TOL).is_err());
}
