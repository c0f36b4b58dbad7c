//! Symplectic eigenvalues of real symmetric positive definite `M` through
//! the equivalent Bethe–Salpeter problem.
//!
//! With `Q_n = (1/√2) [[I, −iI], [I, iI]]` one has `Q_n^H Ω Q_n = M` and
//! `Q_n^H C_n Q_n = −i J_n`, so `Ω z = C z λ` pairs up with the Williamson
//! form of `M`, and `S = Q_n^H Φ(X, Y) Q_l` is real:
//!
//! ```text
//! S = [ Re(X + Y)   Im(X + Y) ]
//!     [ Im(Y − X)   Re(X − Y) ]
//! ```

use crate::error::{Error, Result};
use crate::ihl;
use crate::linalg::{self, c, RMat, CMat};
use crate::lobpcg::{lobpcg_solve, ConvergenceHistory, PreconditionerKind, SolverConfig};
use crate::problems::build_preconditioner;
use crate::structured::{omega_gram, BshProblem, PhiBlockMatrix};

/// `Q_n = (1/√2) [[I, −iI], [I, iI]]`. Only used by dense code paths.
pub fn unitary_q(n: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        q[(i, i)] = c(s, 0.0);
        q[(i, n + i)] = c(0.0, -s);
        q[(n + i, i)] = c(s, 0.0);
        q[(n + i, n + i)] = c(0.0, s);
    }
    q
}

/// The Bethe–Salpeter pair unitarily congruent to `M`:
/// `A = (M11 + M22)/2 + i(M12 − M21)/2`, `B = (M11 − M22)/2 − i(M12 + M21)/2`.
pub fn spd_to_bsh(m: &RMat) -> Result<BshProblem> {
    let (r, cdim) = m.shape();
    if r != cdim || r % 2 != 0 {
        return Err(Error::dim(format!("expected a square matrix of even order, got {r}x{cdim}")));
    }
    let tol = 1e-12 * linalg::real_max_abs(m).max(1.0);
    let asym = linalg::real_max_abs(&(m - m.transpose()));
    if asym > tol {
        return Err(Error::Symmetry {
            which: "M",
            residual: asym,
            tolerance: tol,
        });
    }
    let n = r / 2;
    let m11 = m.view((0, 0), (n, n));
    let m12 = m.view((0, n), (n, n));
    let m21 = m.view((n, 0), (n, n));
    let m22 = m.view((n, n), (n, n));
    let a = CMat::from_fn(n, n, |i, j| {
        c(
            0.5 * (m11[(i, j)] + m22[(i, j)]),
            0.5 * (m12[(i, j)] - m21[(i, j)]),
        )
    });
    let b = CMat::from_fn(n, n, |i, j| {
        c(
            0.5 * (m11[(i, j)] - m22[(i, j)]),
            -0.5 * (m12[(i, j)] + m21[(i, j)]),
        )
    });
    BshProblem::new(a, b, true)
}

/// Inverse of [`spd_to_bsh`]: `M = Q_n^H Ω Q_n`.
pub fn bsh_to_spd(p: &BshProblem) -> RMat {
    let n = p.n();
    let mut m = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (p.a()[(i, j)], p.b()[(i, j)]);
            m[(i, j)] = a.re + b.re;
            m[(n + i, n + j)] = a.re - b.re;
            m[(i, n + j)] = a.im - b.im;
            m[(n + i, j)] = -a.im - b.im;
        }
    }
    m
}

/// `Q_n^H Φ(X, Y) Q_l` from the closed form; columns `[s_1..s_l, s_{l+1}..s_{2l}]`.
pub fn phi_to_symplectic(z: &PhiBlockMatrix) -> RMat {
    let (n, l) = (z.n(), z.k());
    let mut s = RMat::zeros(2 * n, 2 * l);
    for j in 0..l {
        for i in 0..n {
            let (x, y) = (z.x()[(i, j)], z.y()[(i, j)]);
            let sum = x + y;
            let diff = x - y;
            s[(i, j)] = sum.re;
            s[(n + i, j)] = -diff.im;
            s[(i, l + j)] = sum.im;
            s[(n + i, l + j)] = diff.re;
        }
    }
    s
}

/// Scales each pair so `s_i^T J s_{l+i} = 1` and flips signs so the
/// largest-magnitude entry of `s_i` is positive.
pub fn normalize_symplectic_pairs(s: &mut RMat) {
    let n = s.nrows() / 2;
    let l = s.ncols() / 2;
    for i in 0..l {
        let mut d = 0.0;
        for r in 0..n {
            d += s[(r, i)] * s[(n + r, l + i)] - s[(n + r, i)] * s[(r, l + i)];
        }
        let mut scale = if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 };
        let col = s.column(i);
        let (mut best, mut at) = (0.0_f64, 0);
        for (r, v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                at = r;
            }
        }
        if col[at] < 0.0 {
            scale = -scale;
        }
        s.column_mut(i).scale_mut(scale);
        s.column_mut(l + i).scale_mut(scale);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymplecticDiagnostics {
    /// `||S^T J_n S − J_l||_max`.
    pub j_orthogonality: f64,
    /// `||S^T M S − diag(Λ, Λ)||_max`.
    pub diagonalization: f64,
    /// `|trace(S^T M S) − 2 Σ λ_i| / (2 Σ λ_i)`.
    pub trace: f64,
}

#[derive(Clone, Debug)]
pub struct SymplecticResult {
    pub lambda: Vec<f64>,
    /// Real `2n × 2l` block with symplectic columns.
    pub s_block: RMat,
    pub diagnostics: SymplecticDiagnostics,
    pub converged: bool,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub history: ConvergenceHistory,
}

pub fn symplectic_diagnostics(m: &RMat, s: &RMat, lambda: &[f64]) -> SymplecticDiagnostics {
    let n = m.nrows() / 2;
    let l = lambda.len();
    let jn = linalg::symplectic_unit(n);
    let jl = linalg::symplectic_unit(l);
    let j_orthogonality = linalg::real_max_abs(&(s.transpose() * &jn * s - jl));
    let sms = s.transpose() * m * s;
    let mut target = RMat::zeros(2 * l, 2 * l);
    for (i, &v) in lambda.iter().enumerate() {
        target[(i, i)] = v;
        target[(l + i, l + i)] = v;
    }
    let diagonalization = linalg::real_max_abs(&(&sms - target));
    let two_sum = 2.0 * lambda.iter().sum::<f64>();
    let trace = if two_sum > 0.0 {
        (sms.trace() - two_sum).abs() / two_sum
    } else {
        f64::INFINITY
    };
    SymplecticDiagnostics {
        j_orthogonality,
        diagonalization,
        trace,
    }
}

/// The `cfg.l` smallest symplectic eigenvalues of `m` with their symplectic
/// eigenvectors. Non-convergence is reported through `converged`.
pub fn symplectic_eigensolve(m: &RMat, cfg: &SolverConfig, precond: PreconditionerKind) -> Result<SymplecticResult> {
    let p = spd_to_bsh(m)?;
    let t = build_preconditioner(&p, precond)?;
    let sol = lobpcg_solve(&p, &t, cfg, None)?;
    let mut s = phi_to_symplectic(&sol.eigvecs);
    normalize_symplectic_pairs(&mut s);
    let diagnostics = symplectic_diagnostics(m, &s, &sol.lambda);
    Ok(SymplecticResult {
        lambda: sol.lambda,
        s_block: s,
        diagnostics,
        converged: sol.converged,
        residuals: sol.residuals,
        iterations: sol.iterations,
        history: sol.history,
    })
}

/// `|trace(Z^H Ω Z) − 2 Σ θ_i|` with `θ` the Ritz values of the
/// `C`-orthonormal `z`; zero exactly when `span(z)` is an invariant
/// subspace for the smallest eigenvalues it contains.
pub fn trace_min_check(p: &BshProblem, z: &PhiBlockMatrix) -> Result<f64> {
    let k = omega_gram(p, z, z)?;
    let tr = 2.0 * k.k1.trace().re;
    let r = ihl::rayleigh_ritz(p, z)?;
    Ok((tr - 2.0 * r.theta_plus.iter().sum::<f64>()).abs())
}
