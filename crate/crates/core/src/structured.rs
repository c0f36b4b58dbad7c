//! The `Φ(X, Y)` block structure, the Bethe–Salpeter Hamiltonian container,
//! and every structured product the solvers are built from.
//!
//! A structured matrix
//!
//! ```text
//! Φ(X, Y) = [ X   conj(Y) ]
//!           [ Y   conj(X) ]
//! ```
//!
//! is stored through its two `n × k` generators only. Products, Gram
//! matrices and the action of `Ω = [[A, B], [conj(B), conj(A)]]` are
//! evaluated on the generators, so the structure is preserved exactly.
//! Assembly into a dense `2n × 2k` matrix exists for tests and oracles.

use std::ops::{Add, Sub};
use std::sync::OnceLock;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, C64};

/// Default cap on the half-dimension for dense definiteness checks.
pub const DENSE_CHECK_CAP: usize = 512;

/// `Φ(X, Y)`: a `2n × 2k` structured matrix stored as its generators.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiBlockMatrix {
    x: CMat,
    y: CMat,
}

impl PhiBlockMatrix {
    pub fn new(x: CMat, y: CMat) -> Result<Self> {
        if x.shape() != y.shape() {
            return Err(Error::dim(format!(
                "generators differ in shape: {:?} vs {:?}",
                x.shape(),
                y.shape()
            )));
        }
        Ok(Self { x, y })
    }

    pub(crate) fn from_parts(x: CMat, y: CMat) -> Self {
        debug_assert_eq!(x.shape(), y.shape());
        Self { x, y }
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        Self::from_parts(CMat::zeros(n, k), CMat::zeros(n, k))
    }

    /// `Φ(I_n, 0)`, the identity of order `2n`.
    pub fn identity(n: usize) -> Self {
        Self::from_parts(CMat::identity(n, n), CMat::zeros(n, n))
    }

    /// `Φ(I_{n×k}, 0)`: the first `k` unit blocks.
    pub fn unit_blocks(n: usize, k: usize) -> Self {
        Self::from_parts(CMat::identity(n, k), CMat::zeros(n, k))
    }

    pub fn x(&self) -> &CMat {
        &self.x
    }

    pub fn y(&self) -> &CMat {
        &self.y
    }

    pub fn into_parts(self) -> (CMat, CMat) {
        (self.x, self.y)
    }

    /// Half the row count.
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of structured blocks (half the column count).
    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// `[[X, conj(Y)], [Y, conj(X)]]`.
    pub fn assemble(&self) -> CMat {
        let (n, k) = self.x.shape();
        let mut out = CMat::zeros(2 * n, 2 * k);
        out.view_mut((0, 0), (n, k)).copy_from(&self.x);
        out.view_mut((0, k), (n, k)).copy_from(&self.y.conjugate());
        out.view_mut((n, 0), (n, k)).copy_from(&self.y);
        out.view_mut((n, k), (n, k)).copy_from(&self.x.conjugate());
        out
    }

    /// Blocks `start .. start + len`.
    pub fn blocks(&self, start: usize, len: usize) -> Self {
        Self::from_parts(
            self.x.columns(start, len).into_owned(),
            self.y.columns(start, len).into_owned(),
        )
    }

    pub fn block(&self, j: usize) -> Self {
        self.blocks(j, 1)
    }

    pub fn select_blocks(&self, idx: &[usize]) -> Self {
        Self::from_parts(self.x.select_columns(idx), self.y.select_columns(idx))
    }

    pub(crate) fn set_block(&mut self, j: usize, blk: &PhiBlockMatrix) {
        self.x.set_column(j, &blk.x.column(0));
        self.y.set_column(j, &blk.y.column(0));
    }

    /// Horizontal concatenation of structured matrices with equal `n`.
    pub fn hcat(parts: &[&PhiBlockMatrix]) -> Result<Self> {
        let n = parts.first().map(|p| p.n()).unwrap_or(0);
        if parts.iter().any(|p| p.n() != n) {
            return Err(Error::dim("hcat of blocks with different row counts"));
        }
        let k: usize = parts.iter().map(|p| p.k()).sum();
        let mut x = CMat::zeros(n, k);
        let mut y = CMat::zeros(n, k);
        let mut at = 0;
        for p in parts {
            x.columns_mut(at, p.k()).copy_from(&p.x);
            y.columns_mut(at, p.k()).copy_from(&p.y);
            at += p.k();
        }
        Ok(Self::from_parts(x, y))
    }

    /// Multiplies block `j` (both generators) by `s[j]`.
    pub fn scale_blocks(&mut self, s: &[f64]) {
        for (j, &sj) in s.iter().enumerate() {
            self.x.column_mut(j).scale_mut(sj);
            self.y.column_mut(j).scale_mut(sj);
        }
    }

    /// Multiplies block `j` by the complex scalar `s[j]`: the first column
    /// picks up `s[j]`, its partner `conj(s[j])`.
    pub fn scale_blocks_complex(&mut self, s: &[C64]) {
        for (j, &sj) in s.iter().enumerate() {
            self.x.column_mut(j).iter_mut().for_each(|v| *v *= sj);
            self.y.column_mut(j).iter_mut().for_each(|v| *v *= sj);
        }
    }

    /// `||x_j||² + ||y_j||²` per block: the squared Euclidean norm of each
    /// assembled column.
    pub fn block_norms_sq(&self) -> Vec<f64> {
        (0..self.k())
            .map(|j| self.x.column(j).norm_squared() + self.y.column(j).norm_squared())
            .collect()
    }

    /// `x_j^H x_j − y_j^H y_j` per block: the `C_n`-norm of each first column.
    pub fn c_norms(&self) -> Vec<f64> {
        (0..self.k())
            .map(|j| self.x.column(j).norm_squared() - self.y.column(j).norm_squared())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_parts(&self.x * cr(s), &self.y * cr(s))
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.x).max(linalg::max_abs(&self.y))
    }

    /// Spectral norm of the assembled matrix.
    pub fn two_norm(&self) -> f64 {
        let g = euclid_gram(self, self);
        linalg::herm_two_norm(&g.assemble()).sqrt()
    }
}

impl<'a> Sub<&'a PhiBlockMatrix> for &'a PhiBlockMatrix {
    type Output = PhiBlockMatrix;
    fn sub(self, rhs: &'a PhiBlockMatrix) -> PhiBlockMatrix {
        PhiBlockMatrix::from_parts(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl<'a> Add<&'a PhiBlockMatrix> for &'a PhiBlockMatrix {
    type Output = PhiBlockMatrix;
    fn add(self, rhs: &'a PhiBlockMatrix) -> PhiBlockMatrix {
        PhiBlockMatrix::from_parts(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

/// Generators `(G1, G2)` of the `C`-Gram matrix
/// `[[G1, G2], [−conj(G2), −conj(G1)]] = U^H C_n V`.
#[derive(Clone, Debug, PartialEq)]
pub struct CGramPair {
    pub g1: CMat,
    pub g2: CMat,
}

impl CGramPair {
    pub fn assemble(&self) -> CMat {
        let (r, c) = self.g1.shape();
        let mut out = CMat::zeros(2 * r, 2 * c);
        out.view_mut((0, 0), (r, c)).copy_from(&self.g1);
        out.view_mut((0, c), (r, c)).copy_from(&self.g2);
        out.view_mut((r, 0), (r, c)).copy_from(&(-self.g2.conjugate()));
        out.view_mut((r, c), (r, c)).copy_from(&(-self.g1.conjugate()));
        out
    }

    /// `C_p · (this)` as a structured matrix: `Φ(G1, conj(G2))`.
    pub(crate) fn signed_phi(&self) -> PhiBlockMatrix {
        PhiBlockMatrix::from_parts(self.g1.clone(), self.g2.conjugate())
    }
}

/// Generators `(K1, K2)` of a structured Hermitian matrix
/// `[[K1, K2], [conj(K2), conj(K1)]]`, e.g. the projection `U^H Ω V`.
///
/// The layout mirrors `Ω` itself, so a projected `Ω` is again a
/// Bethe–Salpeter pair with `A = K1`, `B = K2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiGramPair {
    pub k1: CMat,
    pub k2: CMat,
}

impl PhiGramPair {
    pub fn assemble(&self) -> CMat {
        self.as_phi().assemble()
    }

    /// The same matrix written as `Φ(K1, conj(K2))`.
    pub fn as_phi(&self) -> PhiBlockMatrix {
        PhiBlockMatrix::from_parts(self.k1.clone(), self.k2.conjugate())
    }
}

/// A Bethe–Salpeter Hamiltonian `H = C_n Ω` given by its blocks
/// `A = A^H` and `B = B^T`.
#[derive(Clone, Debug)]
pub struct BshProblem {
    a: CMat,
    b: CMat,
    omega_norm: OnceLock<(usize, u64, f64)>,
}

impl BshProblem {
    /// Tolerance for the Hermitian/symmetric checks:
    /// `1e-12 · max(1, ||A||_max)`.
    pub fn validation_tolerance(a: &CMat) -> f64 {
        1e-12 * linalg::max_abs(a).max(1.0)
    }

    pub fn new(a: CMat, b: CMat, validate: bool) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::dim(format!(
                "A is {:?} and B is {:?}; both must be square and equal",
                a.shape(),
                b.shape()
            )));
        }
        if validate {
            let tol = Self::validation_tolerance(&a);
            let ra = linalg::max_abs(&(&a - a.adjoint()));
            if ra > tol {
                return Err(Error::Symmetry {
                    which: "A (Hermitian)",
                    residual: ra,
                    tolerance: tol,
                });
            }
            let rb = linalg::max_abs(&(&b - b.transpose()));
            if rb > tol {
                return Err(Error::Symmetry {
                    which: "B (complex symmetric)",
                    residual: rb,
                    tolerance: tol,
                });
            }
        }
        Ok(Self {
            a,
            b,
            omega_norm: OnceLock::new(),
        })
    }

    /// Wraps a projected pair; the Hermitian part of `K1` and the symmetric
    /// part of `K2` are taken so roundoff asymmetry does not leak further.
    pub(crate) fn from_projection(pair: PhiGramPair) -> Self {
        let a = linalg::hermitize(&pair.k1);
        let b = (&pair.k2 + pair.k2.transpose()) * cr(0.5);
        Self {
            a,
            b,
            omega_norm: OnceLock::new(),
        }
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Dense `Ω = [[A, B], [conj(B), conj(A)]]`.
    pub fn assemble_omega(&self) -> CMat {
        PhiBlockMatrix::from_parts(self.a.clone(), self.b.conjugate()).assemble()
    }

    /// Dense `H = C_n Ω`.
    pub fn assemble_h(&self) -> CMat {
        linalg::apply_signature(&self.assemble_omega())
    }

    /// Dense Cholesky check of `Ω`; `None` when `n` exceeds `cap`.
    pub fn check_definite(&self, cap: usize) -> Option<bool> {
        if self.n() > cap {
            return None;
        }
        Some(linalg::hpd_cholesky(&linalg::hermitize(&self.assemble_omega())).is_some())
    }

    /// Sketched estimate of `||Ω||_2`, cached for the first `(t, seed)`
    /// requested. See [`estimate_omega_norm`].
    pub fn omega_norm_estimate(&self, t: usize, seed: u64) -> f64 {
        if let Some(&(ct, cs, v)) = self.omega_norm.get() {
            if ct == t && cs == seed {
                return v;
            }
            return sketch_omega_norm(self, t, seed);
        }
        let v = sketch_omega_norm(self, t, seed);
        let _ = self.omega_norm.set((t, seed, v));
        v
    }
}

fn check_rows(p: &BshProblem, u: &PhiBlockMatrix) -> Result<()> {
    if p.n() != u.n() {
        return Err(Error::dim(format!(
            "problem has n = {} but block has n = {}",
            p.n(),
            u.n()
        )));
    }
    Ok(())
}

/// `Ω · Φ(U_X, U_Y) = Φ(A U_X + B U_Y, conj(B) U_X + conj(A) U_Y)`.
pub fn omega_apply(p: &BshProblem, u: &PhiBlockMatrix) -> Result<PhiBlockMatrix> {
    check_rows(p, u)?;
    let vx = &p.a * &u.x + &p.b * &u.y;
    let vy = p.b.conjugate() * &u.x + p.a.conjugate() * &u.y;
    Ok(PhiBlockMatrix::from_parts(vx, vy))
}

/// `U^H C_n V` as its generator pair.
pub fn c_gram(u: &PhiBlockMatrix, v: &PhiBlockMatrix) -> Result<CGramPair> {
    if u.n() != v.n() {
        return Err(Error::dim("c_gram operands have different row counts"));
    }
    let g1 = u.x.adjoint() * &v.x - u.y.adjoint() * &v.y;
    let g2 = u.x.adjoint() * v.y.conjugate() - u.y.adjoint() * v.x.conjugate();
    Ok(CGramPair { g1, g2 })
}

/// `U^H V` (Euclidean) as its generator pair.
pub(crate) fn euclid_gram(u: &PhiBlockMatrix, v: &PhiBlockMatrix) -> PhiGramPair {
    let k1 = u.x.adjoint() * &v.x + u.y.adjoint() * &v.y;
    let k2 = u.x.adjoint() * v.y.conjugate() + u.y.adjoint() * v.x.conjugate();
    PhiGramPair { k1, k2 }
}

/// `U^H Ω V` as its generator pair.
pub fn omega_gram(p: &BshProblem, u: &PhiBlockMatrix, v: &PhiBlockMatrix) -> Result<PhiGramPair> {
    check_rows(p, u)?;
    let ov = omega_apply(p, v)?;
    Ok(euclid_gram(u, &ov))
}

/// `Φ(U_X, U_Y) · Φ(V_X, V_Y)`.
pub fn phi_product(u: &PhiBlockMatrix, v: &PhiBlockMatrix) -> Result<PhiBlockMatrix> {
    if u.k() != v.n() {
        return Err(Error::dim(format!(
            "phi_product inner dimensions {} and {} differ",
            u.k(),
            v.n()
        )));
    }
    let wx = &u.x * &v.x + u.y.conjugate() * &v.y;
    let wy = &u.y * &v.x + u.x.conjugate() * &v.y;
    Ok(PhiBlockMatrix::from_parts(wx, wy))
}

/// `||Ω G||_F / ||G||_F` for a seeded standard complex Gaussian `G` of
/// width `t`; cached on the problem for the first `(t, seed)` pair.
pub fn estimate_omega_norm(p: &BshProblem, t: usize, seed: u64) -> f64 {
    p.omega_norm_estimate(t.max(1), seed)
}

fn sketch_omega_norm(p: &BshProblem, t: usize, seed: u64) -> f64 {
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = linalg::gaussian_complex(&mut rng, n, t);
    let bottom = linalg::gaussian_complex(&mut rng, n, t);
    let ot = &p.a * &top + &p.b * &bottom;
    let ob = p.b.conjugate() * &top + p.a.conjugate() * &bottom;
    let num = (ot.norm_squared() + ob.norm_squared()).sqrt();
    let den = (top.norm_squared() + bottom.norm_squared()).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Eigenvalues of the dense `C_n Ω` computed through a real embedding and a
/// general (non-symmetric) eigensolver, sorted ascending by real part.
/// Oracle support: independent of every structured routine.
pub fn general_eigenvalues_of_h(p: &BshProblem) -> Vec<C64> {
    general_eigenvalues(&p.assemble_h())
}

/// Eigenvalues of a complex matrix via the real `2N × 2N` embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is `eig(M) ∪ conj(eig(M))`.
/// Every eigenvalue of `M` therefore appears together with its conjugate;
/// callers comparing real spectra keep every other entry.
pub fn general_eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let mut big = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&re);
    big.view_mut((0, n), (n, n)).copy_from(&(-&im));
    big.view_mut((n, 0), (n, n)).copy_from(&im);
    big.view_mut((n, n), (n, n)).copy_from(&re);
    let ev: DVector<C64> = big.complex_eigenvalues();
    let mut v: Vec<C64> = ev.iter().copied().collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}
