//! Small dense helpers shared by the structured kernels and the oracles.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

/// Unit roundoff of IEEE double precision, 2^-52.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Cholesky factor of a Hermitian matrix, `None` unless positive definite.
/// The complex factorization never fails on its own, so the pivots are
/// checked explicitly.
pub fn hpd_cholesky(m: &CMat) -> Option<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let chol = m.clone().cholesky()?;
    let l = chol.l_dirty();
    let ok = (0..m.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(chol)
}

/// `(m + m^H) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
///
/// Only the Hermitian part of `m` is used.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Spectral norm of a Hermitian matrix: the largest eigenvalue magnitude.
pub fn herm_two_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitize(m)
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of an arbitrary matrix, through its Gram matrix.
pub fn two_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() >= m.ncols() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    herm_two_norm(&gram).sqrt()
}

pub fn real_two_norm(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.transpose() * m;
    gram.symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn real_max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.abs()))
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &CMat) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn gaussian_real<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `diag(I_n, -I_n)` applied from the left.
pub fn apply_signature(m: &CMat) -> CMat {
    let half = m.nrows() / 2;
    let mut out = m.clone();
    out.rows_mut(half, half).neg_mut();
    out
}

/// The dense signature matrix `C_n = diag(I_n, -I_n)`.
pub fn signature(n: usize) -> CMat {
    CMat::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            cr(0.0)
        } else if i < n {
            cr(1.0)
        } else {
            cr(-1.0)
        }
    })
}

/// The real symplectic unit `J_n = [[0, I], [-I, 0]]`.
pub fn symplectic_unit(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Euclidean orthonormal basis of the range of `m` (columns below `tol`
/// relative to the largest singular value are discarded).
pub fn orthonormal_range(m: &CMat, tol: f64) -> CMat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol * smax)
        .collect();
    CMat::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Relative residual of projecting the columns of `m` onto the range of the
/// orthonormal `basis`.
pub fn projection_residual(basis: &CMat, m: &CMat) -> f64 {
    let proj = basis * (basis.adjoint() * m);
    let denom = m.norm().max(f64::MIN_POSITIVE);
    (m - proj).norm() / denom
}
