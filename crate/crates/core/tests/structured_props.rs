mod common;

use bse_lobpcg::dense_bse_solve;
use bse_lobpcg::structured::{c_gram, omega_apply, omega_gram, phi_product};
use bse_lobpcg::PhiBlockMatrix;
use common::*;
use proptest::prelude::*;

fn phi_pattern_holds(u: &PhiBlockMatrix) -> bool {
    let a = u.assemble();
    let (n, k) = (u.n(), u.k());
    (0..n).all(|i| {
        (0..k).all(|j| a[(i, k + j)] == a[(n + i, j)].conj() && a[(n + i, k + j)] == a[(i, j)].conj())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(48) })]

    #[test]
    fn products_match_dense(n in 1usize..24, k in 1usize..6, m in 1usize..5, seed in any::<u64>()) {
        let u = random_phi(n, k, 0.7, seed);
        let v = random_phi(k, m, 0.7, seed ^ 1);
        let w = random_phi(n, m, 0.7, seed ^ 2);
        let p = random_bsh(n, seed ^ 3);
        let (ua, va, wa) = (u.assemble(), v.assemble(), w.assemble());

        let prod = phi_product(&u, &v).unwrap();
        prop_assert!(phi_pattern_holds(&prod));
        let dense = &ua * &va;
        prop_assert!(max_abs(&(prod.assemble() - &dense)) <= 1e-13 * max_abs(&dense).max(1.0));

        let g = c_gram(&u, &w).unwrap().assemble();
        let dense = dense_c_gram(&ua, &wa);
        prop_assert!(max_abs(&(g - &dense)) <= 1e-13 * max_abs(&dense).max(1.0));

        let omega = p.assemble_omega();
        let ou = omega_apply(&p, &u).unwrap();
        prop_assert!(phi_pattern_holds(&ou));
        let dense = &omega * &ua;
        prop_assert!(max_abs(&(ou.assemble() - &dense)) <= 1e-13 * max_abs(&dense));

        let og = omega_gram(&p, &u, &w).unwrap().assemble();
        let dense = ua.adjoint() * &omega * &wa;
        prop_assert!(max_abs(&(og - &dense)) <= 1e-13 * max_abs(&dense));
    }

    #[test]
    fn gram_generators_have_the_right_symmetry(n in 1usize..24, k in 1usize..6, seed in any::<u64>()) {
        let u = random_phi(n, k, 0.9, seed);
        let p = random_bsh(n, seed ^ 7);
        let scale = u.two_norm().powi(2);
        let g = c_gram(&u, &u).unwrap();
        prop_assert!(max_abs(&(&g.g1 - g.g1.adjoint())) <= 1e-13 * scale);
        prop_assert!(max_abs(&(&g.g2 + g.g2.transpose())) <= 1e-13 * scale);
        let o = omega_gram(&p, &u, &u).unwrap();
        let oscale = scale * max_abs(&p.assemble_omega()) * (2 * n) as f64;
        prop_assert!(max_abs(&(&o.k1 - o.k1.adjoint())) <= 1e-13 * oscale);
        prop_assert!(max_abs(&(&o.k2 - o.k2.transpose())) <= 1e-13 * oscale);
    }

    #[test]
    fn spectrum_of_h_comes_in_pairs(n in 1usize..14, seed in any::<u64>()) {
        let p = random_bsh(n, seed);
        let mut eigs: Vec<f64> = complex_eigs(&p.assemble_h()).iter().map(|z| z.re).collect();
        eigs.sort_by(f64::total_cmp);
        let pos: Vec<f64> = eigs.iter().copied().filter(|&x| x > 0.0).step_by(2).collect();
        let mut neg: Vec<f64> = eigs.iter().copied().filter(|&x| x < 0.0).map(|x| -x).step_by(2).collect();
        neg.sort_by(f64::total_cmp);
        prop_assert_eq!(pos.len(), n);
        prop_assert!(rel_err(&neg, &pos) <= 1e-12);
        let spec = dense_bse_solve(&p).unwrap();
        prop_assert!(rel_err(&spec.lambda_plus, &pos) <= 1e-12);
    }
}

#[test]
fn hermitian_checks_reject_bad_input() {
    use bse_lobpcg::linalg::{c, CMat};
    use bse_lobpcg::{BshProblem, Error};
    let a = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 1.0), c(1.0, 1.0), c(2.0, 0.0)]);
    let b = CMat::zeros(2, 2);
    assert!(matches!(BshProblem::new(a, b.clone(), true), Err(Error::Symmetry { .. })));
    let a = CMat::identity(2, 2);
    let bad_b = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
    assert!(matches!(BshProblem::new(a.clone(), bad_b, true), Err(Error::Symmetry { .. })));
    let wide = CMat::zeros(2, 3);
    assert!(BshProblem::new(a, wide, true).is_err());
}
