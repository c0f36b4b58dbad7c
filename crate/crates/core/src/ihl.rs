//! Rayleigh–Ritz and the structured improved Hetmaniuk–Lehoucq (IHL)
//! update in the `C_n`- and `Ω`-inner products.
//!
//! For a search basis `U = [Z, P, W]` with `m` blocks and Ritz coefficients
//! `V = [V_1, V_2]` (first `k` blocks and the rest), the new iterate is
//! `Z = U V_1` and the companion block is `P = U V_2 Q`, where `Q`
//! orthonormalizes `C V̌_12^H C = Φ(V_X,12^H, −V_Y,12^T)` in the metric of
//! the small problem. Only this small `(m − k) × k` factor is
//! orthogonalized.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{dense_bse_solve, structured_gram_eig};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::ortho::{self, DEFAULT_NEUTRAL_TOL};
use crate::structured::{c_gram, omega_gram, phi_product, BshProblem, PhiBlockMatrix};

/// Relative threshold below which a column of the small IHL factor counts
/// as dependent in the Euclidean metric.
const SMALL_FACTOR_DROP: f64 = 1e-8;

/// Ritz values (ascending, positive) and the structured coefficient matrix.
#[derive(Clone, Debug)]
pub struct RitzOutput {
    pub theta_plus: Vec<f64>,
    pub v_matrix: PhiBlockMatrix,
}

#[derive(Clone, Debug)]
pub struct IhlBases {
    pub z: PhiBlockMatrix,
    pub p: PhiBlockMatrix,
    /// The orthonormal small factor `Q` (`(m − k) × min(k, m − k)` blocks).
    pub q: PhiBlockMatrix,
}

/// Outcome of the randomized orthogonality probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReorthCheck {
    pub needed: bool,
    /// `||E_1 g||_∞ + ||E_2 g||_∞`.
    pub measured: f64,
    pub threshold: f64,
}

/// Rayleigh–Ritz for a `C_n`-orthonormal basis: solves the projected
/// definite pencil `(U^H Ω U, C)` densely.
pub fn rayleigh_ritz(p: &BshProblem, u: &PhiBlockMatrix) -> Result<RitzOutput> {
    let proj = BshProblem::from_projection(omega_gram(p, u, u)?);
    let spec = dense_bse_solve(&proj).map_err(|e| match e {
        Error::NotDefinite => Error::ProjectedNotDefinite,
        other => other,
    })?;
    Ok(RitzOutput {
        theta_plus: spec.lambda_plus,
        v_matrix: spec.eigvecs,
    })
}

/// Rayleigh–Ritz for an `Ω`-orthonormal basis. The projected pencil is
/// `(I, U^H C U)`; its structured eigenvalues `σ` give `θ = 1/σ`, and the
/// unitary coefficient matrix keeps `U V` `Ω`-orthonormal.
pub fn rayleigh_ritz_omega(u: &PhiBlockMatrix) -> Result<RitzOutput> {
    let spec = structured_gram_eig(&c_gram(u, u)?)?;
    let order: Vec<usize> = (0..spec.lambda_plus.len()).rev().collect();
    Ok(RitzOutput {
        theta_plus: order.iter().map(|&i| 1.0 / spec.lambda_plus[i]).collect(),
        v_matrix: spec.eigvecs.select_blocks(&order),
    })
}

fn split(u: &PhiBlockMatrix, r: &RitzOutput, k: usize) -> Result<(PhiBlockMatrix, PhiBlockMatrix, usize)> {
    let m = u.k();
    if r.v_matrix.n() != m || r.v_matrix.k() != m {
        return Err(Error::dim(format!(
            "Ritz coefficients are {}x{} blocks, basis has {m}",
            r.v_matrix.n(),
            r.v_matrix.k()
        )));
    }
    if k > m {
        return Err(Error::dim(format!("block size {k} exceeds basis width {m}")));
    }
    let z = phi_product(u, &r.v_matrix.blocks(0, k))?;
    Ok((z, r.v_matrix.blocks(k, m - k), m - k))
}

/// `Φ(V_X,12^H, ±V_Y,12^T)`, the `(m − k) × k` small factor.
fn small_factor(v: &PhiBlockMatrix, k: usize, negate_y: bool) -> PhiBlockMatrix {
    let m = v.k();
    let vx12 = v.x().view((0, k), (k, m - k));
    let vy12 = v.y().view((0, k), (k, m - k));
    let y = if negate_y { -vy12.transpose() } else { vy12.transpose() };
    PhiBlockMatrix::from_parts(vx12.adjoint(), y)
}

/// IHL update in the `C_n`-inner product. `Q` comes from truncating SVQB2;
/// a rank-deficient factor is completed with unit blocks so `P` keeps
/// `min(k, m − k)` blocks.
pub fn ihl_update_c(u: &PhiBlockMatrix, r: &RitzOutput, k: usize) -> Result<IhlBases> {
    let (z, v2, rest) = split(u, r, k)?;
    let q = if rest <= k {
        PhiBlockMatrix::identity(rest)
    } else {
        let s = small_factor(&r.v_matrix, k, true);
        let q = ortho::svqb_core(&s, true, DEFAULT_NEUTRAL_TOL, true)?;
        if q.k() < k {
            ortho::c_complete(&q, k, DEFAULT_NEUTRAL_TOL)?
        } else {
            q
        }
    };
    let p = phi_product(u, &phi_product(&v2, &q)?)?;
    Ok(IhlBases { z, p, q })
}

/// IHL update in the `Ω`-inner product. `V` is unitary here, so `Q` is
/// orthonormalized in the Euclidean metric (unit blocks fill any rank
/// deficiency).
pub fn ihl_update_omega(u: &PhiBlockMatrix, r: &RitzOutput, k: usize) -> Result<IhlBases> {
    let (z, v2, rest) = split(u, r, k)?;
    let q = if rest <= k {
        PhiBlockMatrix::identity(rest)
    } else {
        let s = small_factor(&r.v_matrix, k, false);
        let cand = PhiBlockMatrix::hcat(&[&s, &PhiBlockMatrix::identity(rest)])?;
        let (q, _) = ortho::euclid_orthonormalize(&cand, Some(SMALL_FACTOR_DROP))?;
        if q.k() < k {
            return Err(Error::Breakdown(format!(
                "Omega-IHL small factor has rank {} < {k}",
                q.k()
            )));
        }
        q.blocks(0, k)
    };
    let p = phi_product(u, &phi_product(&v2, &q)?)?;
    Ok(IhlBases { z, p, q })
}

/// Randomized check of the `C_n`-orthonormality of `[Z, P]` with a real
/// Gaussian trial vector `g`. Reorthogonalization is needed when
/// `||E_1 g||_∞ + ||E_2 g||_∞ ≥ min(τ_0, res / 10)`.
pub fn selective_reorth_needed(bases: &IhlBases, seed: u64, tau0: f64, res_norm: f64) -> ReorthCheck {
    let threshold = tau0.min(0.1 * res_norm);
    let joined = PhiBlockMatrix::hcat(&[&bases.z, &bases.p]).expect("Z and P share n");
    let w = joined.k();
    if w == 0 {
        return ReorthCheck {
            needed: false,
            measured: 0.0,
            threshold,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = linalg::gaussian_real(&mut rng, w, 1).map(cr);
    let (hx, hy) = (joined.x(), joined.y());
    let a = hx * &g;
    let b = hy * &g;
    let e1 = hx.adjoint() * &a - hy.adjoint() * &b - &g;
    let e2 = hy.transpose() * &a - hx.transpose() * &b;
    let measured = linalg::max_abs(&e1) + linalg::max_abs(&e2);
    ReorthCheck {
        needed: measured >= threshold,
        measured,
        threshold,
    }
}

/// `||[Z, P]^H C [Z, P] − C||_max`, the quantity the probe estimates.
pub fn c_orthonormality_error(bases: &IhlBases) -> f64 {
    let joined = PhiBlockMatrix::hcat(&[&bases.z, &bases.p]).expect("Z and P share n");
    let g = c_gram(&joined, &joined).expect("same operand");
    let w = joined.k();
    linalg::max_abs(&(g.g1 - CMat::identity(w, w))).max(linalg::max_abs(&g.g2))
}
