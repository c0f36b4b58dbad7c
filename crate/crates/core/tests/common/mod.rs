#![allow(dead_code)]

use bse_lobpcg::linalg::{cr, gaussian_complex, CMat, RMat, C64};
use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::{BshProblem, PhiBlockMatrix};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const U: f64 = f64::EPSILON / 2.0;

pub fn random_bsh(n: usize, seed: u64) -> BshProblem {
    match gen_random_definite_bsh(n, seed, 1.0).unwrap().data {
        ProblemData::Bsh(p) => p,
        ProblemData::Spd(_) => unreachable!(),
    }
}

pub fn random_phi(n: usize, k: usize, yscale: f64, seed: u64) -> PhiBlockMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PhiBlockMatrix::new(
        gaussian_complex(&mut rng, n, k),
        gaussian_complex(&mut rng, n, k) * cr(yscale),
    )
    .unwrap()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn signature(k: usize) -> CMat {
    CMat::from_fn(2 * k, 2 * k, |i, j| {
        if i != j {
            cr(0.0)
        } else if i < k {
            cr(1.0)
        } else {
            cr(-1.0)
        }
    })
}

/// `U^H C U` straight from the assembled matrix.
pub fn dense_c_gram(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows() / 2;
    let mut cb = b.clone();
    for i in n..2 * n {
        for j in 0..cb.ncols() {
            cb[(i, j)] = -cb[(i, j)];
        }
    }
    a.adjoint() * cb
}

/// `||U^H C U − C||_2` from the assembled matrix.
pub fn dense_c_loss(u: &PhiBlockMatrix) -> f64 {
    let a = u.assemble();
    let g = dense_c_gram(&a, &a) - signature(u.k());
    spectral_norm(&g)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0_f64, |a, &b| a.max(b))
}

/// Eigenvalues of a general complex matrix from nalgebra's real Schur
/// form of the realification; each eigenvalue appears twice.
pub fn complex_eigs(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            big[(i, j)] = z.re;
            big[(i, n + j)] = -z.im;
            big[(n + i, j)] = z.im;
            big[(n + i, n + j)] = z.re;
        }
    }
    big.complex_eigenvalues().iter().copied().collect()
}

/// Positive eigenvalues of `H = C Ω` from a general nonsymmetric solver,
/// ascending, one copy each.
pub fn oracle_positive_spectrum(p: &BshProblem) -> Vec<f64> {
    let mut v: Vec<f64> = complex_eigs(&p.assemble_h())
        .into_iter()
        .filter(|z| z.re > 0.0)
        .map(|z| z.re)
        .collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().step_by(2).collect()
}

/// `|eig(J M)|` for real `M`, ascending, one copy of each `±iλ` pair.
pub fn oracle_symplectic(m: &RMat) -> Vec<f64> {
    let n = m.nrows() / 2;
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    let mut v: Vec<f64> = (j * m).complex_eigenvalues().iter().map(|z| z.norm()).collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().step_by(2).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max)
}

/// Random spd matrix `G G^T + shift I` of order `2n`.
pub fn random_spd(n: usize, seed: u64) -> RMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = bse_lobpcg::linalg::gaussian_real(&mut rng, 2 * n, 2 * n);
    let m = &g * g.transpose() + RMat::identity(2 * n, 2 * n) * (0.5 * n as f64);
    (&m + m.transpose()) * 0.5
}

/// Orthonormal basis of the column range, via SVD with a relative cut.
pub fn range(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-12 * smax)
        .collect();
    CMat::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// `||(I − Q Q^H) M|| / ||M||`.
pub fn out_of_range(q: &CMat, m: &CMat) -> f64 {
    let r = m - q * (q.adjoint() * m);
    spectral_norm(&r) / spectral_norm(m)
}

/// `Φ(W1, 0) Φ(cosh T, sinh T) Φ(W2, 0)` with `T = diag(t)`: exactly
/// `C_k`-orthonormal with `||V||_2 = e^{max t}`.
pub fn hyperbolic_factor(t: &[f64], seed: u64) -> PhiBlockMatrix {
    let k = t.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w1 = bse_lobpcg::problems::random_unitary(k, &mut rng);
    let w2 = bse_lobpcg::problems::random_unitary(k, &mut rng);
    let ch = CMat::from_diagonal(&nalgebra::DVector::from_iterator(k, t.iter().map(|v| cr(v.cosh()))));
    let sh = CMat::from_diagonal(&nalgebra::DVector::from_iterator(k, t.iter().map(|v| cr(v.sinh()))));
    let zero = CMat::zeros(k, k);
    let a = PhiBlockMatrix::new(w1, zero.clone()).unwrap();
    let h = PhiBlockMatrix::new(ch, sh).unwrap();
    let b = PhiBlockMatrix::new(w2, zero).unwrap();
    let ah = bse_lobpcg::structured::phi_product(&a, &h).unwrap();
    bse_lobpcg::structured::phi_product(&ah, &b).unwrap()
}

/// A `C_n`-orthonormal basis from CGS2 of a random block whose `Y` part is
/// scaled by `yscale`; values near 1 give large `||U||`.
pub fn c_basis(n: usize, k: usize, yscale: f64, seed: u64) -> PhiBlockMatrix {
    bse_lobpcg::ortho::c_orthonormalize_cgs(&random_phi(n, k, yscale, seed), 2, 1e-10)
        .unwrap()
        .0
}
