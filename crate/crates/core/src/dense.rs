//! Dense structured spectral solvers.
//!
//! [`dense_bse_solve`] diagonalizes a definite Bethe–Salpeter pencil
//! `Ω z = C_n z λ` through the Cholesky factor `Ω = L L^H`: the Hermitian
//! matrix `W = L^H C_n L` has the same spectrum as `C_n Ω`, and for every
//! positive eigenpair `(μ, v)` the vector `C_n L v / √μ` is a `C_n`-normalized
//! eigenvector. The negative half is never formed; the structure `Φ(X, Y)`
//! supplies it. The same routine solves the Rayleigh–Ritz subproblems of the
//! iterative solver and serves as the desk-scale oracle.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, RMat, C64, UNIT_ROUNDOFF};
use crate::structured::{BshProblem, CGramPair, PhiBlockMatrix};
use crate::symplectic;

/// Positive half of a structured spectrum with its `Φ(X, Y)` eigenvectors.
#[derive(Clone, Debug)]
pub struct StructuredSpectrum {
    /// Ascending, positive.
    pub lambda_plus: Vec<f64>,
    pub eigvecs: PhiBlockMatrix,
}

/// Williamson normal form `S^T M S = diag(Λ, Λ)`.
#[derive(Clone, Debug)]
pub struct WilliamsonResult {
    /// Ascending symplectic eigenvalues.
    pub lambda: Vec<f64>,
    pub s_matrix: RMat,
}

/// Rotates each column pair so that the largest-magnitude entry of
/// `[x_j; y_j]` is real and positive. The first maximal entry wins ties.
pub(crate) fn fix_phases(z: &mut PhiBlockMatrix) {
    let n = z.n();
    let phases: Vec<C64> = (0..z.k())
        .map(|j| {
            let mut best = cr(0.0);
            for i in 0..n {
                for v in [z.x()[(i, j)], z.y()[(i, j)]] {
                    if v.norm() > best.norm() {
                        best = v;
                    }
                }
            }
            if best.norm() == 0.0 {
                cr(1.0)
            } else {
                best.conj() / best.norm()
            }
        })
        .collect();
    z.scale_blocks_complex(&phases);
}

/// Full structured eigendecomposition of a definite Bethe–Salpeter pencil.
pub fn dense_bse_solve(p: &BshProblem) -> Result<StructuredSpectrum> {
    let n = p.n();
    if n == 0 {
        return Ok(StructuredSpectrum {
            lambda_plus: Vec::new(),
            eigvecs: PhiBlockMatrix::zeros(0, 0),
        });
    }
    let omega = linalg::hermitize(&p.assemble_omega());
    let chol = linalg::hpd_cholesky(&omega).ok_or(Error::NotDefinite)?;
    let l = chol.l();
    let cl = linalg::apply_signature(&l);
    let w = l.adjoint() * &cl;
    let (vals, vecs) = linalg::herm_eig(&w);
    if vals[n] <= 0.0 || vals[n - 1] >= 0.0 {
        return Err(Error::NotDefinite);
    }
    let mut z = &cl * vecs.columns(n, n);
    for j in 0..n {
        z.column_mut(j).scale_mut(1.0 / vals[n + j].sqrt());
    }
    let mut eigvecs = PhiBlockMatrix::from_parts(z.rows(0, n).into_owned(), z.rows(n, n).into_owned());
    fix_phases(&mut eigvecs);
    let lambda_plus = vals[n..].to_vec();

    // Catastrophe guard only; accuracy is asserted by the tests.
    let zp = eigvecs.assemble().columns(0, n).into_owned();
    let lam = CMat::from_diagonal(&DVector::from_iterator(n, lambda_plus.iter().map(|&v| cr(v))));
    let r = &omega * &zp - linalg::apply_signature(&zp) * lam;
    let scale = omega.norm() * zp.norm();
    if r.norm() > 1e-6 * scale {
        return Err(Error::ResidualCheck(r.norm() / scale));
    }
    Ok(StructuredSpectrum { lambda_plus, eigvecs })
}

/// Structured eigendecomposition `M = F C_p Φ(Σ₊, 0) F^H` of a `C`-Gram
/// matrix with `F = Φ(F_X, F_Y)` unitary. `Σ₊` is returned ascending.
pub fn structured_gram_eig(m: &CGramPair) -> Result<StructuredSpectrum> {
    let p = m.g1.nrows();
    if p == 0 {
        return Ok(StructuredSpectrum {
            lambda_plus: Vec::new(),
            eigvecs: PhiBlockMatrix::zeros(0, 0),
        });
    }
    let (vals, vecs) = linalg::herm_eig(&m.assemble());
    let smax = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let smin = vals[p];
    if vals[p - 1] >= 0.0 || smin <= 2.0 * p as f64 * UNIT_ROUNDOFF * smax {
        return Err(Error::SingularGram {
            ratio: if smax > 0.0 { smin.abs() / smax } else { 0.0 },
        });
    }
    let fx = vecs.view((0, p), (p, p)).into_owned();
    let fy = vecs.view((p, p), (p, p)).into_owned();
    Ok(StructuredSpectrum {
        lambda_plus: vals[p..].to_vec(),
        eigvecs: PhiBlockMatrix::from_parts(fx, fy),
    })
}

/// Williamson normal form of a real symmetric positive definite `2n × 2n`
/// matrix, computed through the equivalent Bethe–Salpeter problem.
pub fn williamson_dense(m: &RMat) -> Result<WilliamsonResult> {
    let p = symplectic::spd_to_bsh(m)?;
    let n = p.n();
    let spec = dense_bse_solve(&p)?;
    let z = spec.eigvecs.assemble();
    let qn = symplectic::unitary_q(n);
    let s_c = qn.adjoint() * z * &qn;
    let s = s_c.map(|v| v.re);
    let residue = s_c.map(|v| v.im).norm();
    let tol = 1e-9 * s.norm();
    if residue > tol {
        return Err(Error::ImaginaryResidue { residue, tolerance: tol });
    }
    Ok(WilliamsonResult {
        lambda: spec.lambda_plus,
        s_matrix: s,
    })
}
