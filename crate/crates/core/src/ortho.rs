//! Structure-preserving orthogonalization in the indefinite `C_n`-inner
//! product (block CGS and indefinite SVQB), the `Ω`-inner-product remedy
//! for near-neutral breakdown, and loss-of-orthogonality diagnostics.
//!
//! The two columns of a block `[u, ũ]`, `ũ = [conj(u_Y); conj(u_X)]`, are
//! always `C_n`-orthogonal, so CGS only needs one normalization per block.
//! In the `Ω`-inner product they are not, and an extra intra-block step
//! is required.

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat, UNIT_ROUNDOFF};
use crate::structured::{c_gram, euclid_gram, omega_apply, phi_product, BshProblem, CGramPair, PhiBlockMatrix};

/// Default relative threshold for near-neutral blocks, `O(u^{1/2})` scale.
pub const DEFAULT_NEUTRAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrthoReport {
    pub loss_before: f64,
    pub loss_after: f64,
    /// `ρ_U = ||U||² / ||U^H C U||` of the input (zero for the `Ω` metric).
    pub growth_factor: f64,
    pub passes: usize,
    pub breakdown_blocks: Vec<usize>,
    pub fallback_used: bool,
}

#[derive(Clone, Copy, Debug)]
pub enum Metric<'a> {
    C,
    Omega(&'a BshProblem),
}

/// `(||U^H G U − G_id||_2, ρ_U)` where `G` is the metric and `G_id` its
/// identity (`C_p` or `I`).
pub fn orthogonality_loss(u: &PhiBlockMatrix, metric: Metric<'_>) -> (f64, f64) {
    let p = u.k();
    if p == 0 {
        return (0.0, 0.0);
    }
    match metric {
        Metric::C => {
            let m = c_gram(u, u).expect("same operand").assemble();
            let loss = linalg::herm_two_norm(&(&m - linalg::signature(p)));
            let mnorm = linalg::herm_two_norm(&m);
            let unorm2 = linalg::herm_two_norm(&euclid_gram(u, u).assemble());
            let growth = if mnorm > 0.0 { unorm2 / mnorm } else { f64::INFINITY };
            (loss, growth)
        }
        Metric::Omega(prob) => {
            let ou = omega_apply(prob, u).expect("dimension checked by caller");
            let m = euclid_gram(u, &ou).assemble();
            let loss = linalg::herm_two_norm(&(m - CMat::identity(2 * p, 2 * p)));
            (loss, 0.0)
        }
    }
}

/// Normalizes one structured block in the `C_n`-inner product, swapping the
/// roles of the two columns when the first one has negative `C`-norm.
pub fn c_normalize_block(u: &PhiBlockMatrix, neutral_tol: f64) -> Result<PhiBlockMatrix> {
    if u.k() != 1 {
        return Err(Error::dim("c_normalize_block expects a single block"));
    }
    let gamma = u.c_norms()[0];
    let nsq = u.block_norms_sq()[0];
    if nsq == 0.0 || gamma.abs() < neutral_tol * nsq {
        return Err(Error::NeutralBreakdown { block: 0, gamma });
    }
    let mut out = if gamma < 0.0 {
        PhiBlockMatrix::from_parts(u.y().conjugate(), u.x().conjugate())
    } else {
        u.clone()
    };
    out.scale_blocks(&[1.0 / gamma.abs().sqrt()]);
    Ok(out)
}

/// `U − B C_p (B^H C_n U)` for a `C_n`-orthonormal basis `B`.
pub fn c_project_against(u: &PhiBlockMatrix, basis: &PhiBlockMatrix) -> Result<PhiBlockMatrix> {
    if basis.k() == 0 {
        return Ok(u.clone());
    }
    let g = c_gram(basis, u)?;
    Ok(u - &phi_product(basis, &g.signed_phi())?)
}

const RANK_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug)]
pub(crate) struct CgsOptions {
    pub passes: usize,
    pub neutral_tol: f64,
    /// Blocks (other than the first `protect`) whose norm falls below
    /// `drop_tol` times their original norm after projection are discarded.
    pub drop_tol: Option<f64>,
    pub protect: usize,
}

/// Block CGS in the `C_n`-inner product. Returns the orthonormal blocks and
/// the input indices that were kept.
pub(crate) fn cgs_core(u: &PhiBlockMatrix, opts: CgsOptions) -> Result<(PhiBlockMatrix, Vec<usize>)> {
    let (n, k) = (u.n(), u.k());
    let mut out = PhiBlockMatrix::zeros(n, k);
    let mut kept = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = u.block(j);
        let orig = v.block_norms_sq()[0];
        for _ in 0..opts.passes.max(1) {
            if !kept.is_empty() {
                v = c_project_against(&v, &out.blocks(0, kept.len()))?;
            }
        }
        let now = v.block_norms_sq()[0];
        if let Some(tol) = opts.drop_tol {
            if j >= opts.protect && now <= tol * tol * orig {
                continue;
            }
        }
        // A block reduced to rounding noise has no reliable C-norm.
        if now <= RANK_TOL * RANK_TOL * orig {
            return Err(Error::NeutralBreakdown { block: j, gamma: 0.0 });
        }
        match c_normalize_block(&v, opts.neutral_tol) {
            Ok(b) => {
                out.set_block(kept.len(), &b);
                kept.push(j);
            }
            Err(Error::NeutralBreakdown { gamma, .. }) => {
                return Err(Error::NeutralBreakdown { block: j, gamma })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((out.blocks(0, kept.len()), kept))
}

/// Structured block classical Gram–Schmidt in the `C_n`-inner product.
/// With `passes = 2` every block is projected twice before normalization
/// (CGS2).
pub fn c_orthonormalize_cgs(
    u: &PhiBlockMatrix,
    passes: usize,
    neutral_tol: f64,
) -> Result<(PhiBlockMatrix, OrthoReport)> {
    if u.k() > u.n() {
        return Err(Error::dim(format!(
            "cannot orthonormalize {} blocks in dimension 2·{}",
            u.k(),
            u.n()
        )));
    }
    let (loss_before, growth_factor) = orthogonality_loss(u, Metric::C);
    let (q, _) = cgs_core(
        u,
        CgsOptions {
            passes,
            neutral_tol,
            drop_tol: None,
            protect: 0,
        },
    )?;
    let (loss_after, _) = orthogonality_loss(&q, Metric::C);
    Ok((
        q,
        OrthoReport {
            loss_before,
            loss_after,
            growth_factor,
            passes: passes.max(1),
            ..Default::default()
        },
    ))
}

/// One or two passes of indefinite SVQB.
///
/// Each pass normalizes the blocks to unit Euclidean norm, diagonalizes the
/// scaled Gram `M = F C_p Φ(Σ₊, 0) F^H`, and updates `U ← U F Σ^{-1/2}`.
/// With `truncate` the structured directions whose `σ` falls below
/// `neutral_tol · σ_max` are dropped instead of signalling breakdown.
pub(crate) fn svqb_core(
    u: &PhiBlockMatrix,
    reorth: bool,
    neutral_tol: f64,
    truncate: bool,
) -> Result<PhiBlockMatrix> {
    let mut cur = u.clone();
    for _ in 0..if reorth { 2 } else { 1 } {
        if cur.k() == 0 {
            break;
        }
        let norms = cur.block_norms_sq();
        let nonzero: Vec<usize> = (0..cur.k()).filter(|&j| norms[j] > 0.0).collect();
        if nonzero.len() < cur.k() {
            if !truncate {
                return Err(Error::SingularGram { ratio: 0.0 });
            }
            cur = cur.select_blocks(&nonzero);
            if cur.k() == 0 {
                break;
            }
        }
        let scale: Vec<f64> = cur.block_norms_sq().iter().map(|v| 1.0 / v.sqrt()).collect();
        cur.scale_blocks(&scale);
        let p = cur.k();
        let g: CGramPair = c_gram(&cur, &cur)?;
        let (vals, vecs) = linalg::herm_eig(&g.assemble());
        let smax = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let thr = neutral_tol * smax;
        let keep: Vec<usize> = if truncate {
            (0..2 * p).filter(|&i| vals[i] > thr).collect()
        } else {
            let smin = vals[p];
            if vals[p - 1] >= 0.0 || smin < thr || smin * UNIT_ROUNDOFF <= 0.0 || smax / smin * UNIT_ROUNDOFF >= 1.0 {
                return Err(Error::SingularGram {
                    ratio: if smax > 0.0 { smin.abs() / smax } else { 0.0 },
                });
            }
            (p..2 * p).collect()
        };
        let r = keep.len();
        let mut fx = CMat::zeros(p, r);
        let mut fy = CMat::zeros(p, r);
        for (col, &i) in keep.iter().enumerate() {
            let s = cr(1.0 / vals[i].sqrt());
            fx.set_column(col, &(vecs.column(i).rows(0, p) * s));
            fy.set_column(col, &(vecs.column(i).rows(p, p) * s));
        }
        cur = phi_product(&cur, &PhiBlockMatrix::from_parts(fx, fy))?;
    }
    Ok(cur)
}

/// Indefinite SVQB; `reorth` runs a second pass (SVQB2).
pub fn svqb_indefinite(
    u: &PhiBlockMatrix,
    reorth: bool,
    neutral_tol: f64,
) -> Result<(PhiBlockMatrix, OrthoReport)> {
    let (loss_before, growth_factor) = orthogonality_loss(u, Metric::C);
    let q = svqb_core(u, reorth, neutral_tol, false)?;
    let (loss_after, _) = orthogonality_loss(&q, Metric::C);
    Ok((
        q,
        OrthoReport {
            loss_before,
            loss_after,
            growth_factor,
            passes: if reorth { 2 } else { 1 },
            ..Default::default()
        },
    ))
}

/// Gram–Schmidt in a positive definite structured metric `G` whose action
/// on whole blocks is `apply`. `against` must already be `G`-orthonormal.
///
/// Images `G·v` are updated alongside `v`, and recomputed only when a
/// step cancels most of the block. Blocks are projected twice, then the
/// two columns of the block are made `G`-orthogonal, also twice, by
/// `v ← v − t ṽ` with the smaller root of
/// `c t² − 2 a t + conj(c) = 0` (`a = v^H G v`, `c = v^H G ṽ`), which keeps
/// the pair structured.
pub(crate) fn metric_gs<F>(
    apply: F,
    u: &PhiBlockMatrix,
    against: Option<&PhiBlockMatrix>,
    drop_tol: Option<f64>,
) -> Result<(PhiBlockMatrix, Vec<usize>)>
where
    F: Fn(&PhiBlockMatrix) -> Result<PhiBlockMatrix>,
{
    let (n, k) = (u.n(), u.k());
    let gu = apply(u)?;
    let (mut basis, mut gbasis) = match against {
        Some(a) if a.k() > 0 => (a.clone(), apply(a)?),
        _ => (PhiBlockMatrix::zeros(n, 0), PhiBlockMatrix::zeros(n, 0)),
    };
    let base = basis.k();
    let mut out = Vec::with_capacity(k);
    let mut gout = Vec::with_capacity(k);
    let mut kept = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = u.block(j);
        let mut gv = gu.block(j);
        let orig = v.block_norms_sq()[0];
        for _ in 0..2 {
            if basis.k() > 0 {
                let before = v.block_norms_sq()[0];
                let coeff = euclid_gram(&basis, &gv).as_phi();
                v = &v - &phi_product(&basis, &coeff)?;
                // Updated images drift from G·v under heavy cancellation.
                if v.block_norms_sq()[0] < 0.25 * before {
                    gv = apply(&v)?;
                } else {
                    gv = &gv - &phi_product(&gbasis, &coeff)?;
                }
            }
        }
        let nsq = v.block_norms_sq()[0];
        let small = match drop_tol {
            Some(tol) => nsq <= tol * tol * orig,
            None => nsq <= (64.0 * UNIT_ROUNDOFF).powi(2) * orig,
        };
        if small || orig == 0.0 {
            if drop_tol.is_some() {
                continue;
            }
            return Err(Error::ZeroOmegaNorm { block: j });
        }
        let (mut v2, mut gv2) = (v, gv);
        for _ in 0..2 {
            let pair = euclid_gram(&v2, &gv2);
            let a = pair.k1[(0, 0)].re;
            let cc = pair.k2[(0, 0)];
            if a <= 0.0 {
                return Err(Error::ZeroOmegaNorm { block: j });
            }
            let disc = (a * a - cc.norm_sqr()).max(0.0).sqrt();
            let t = cc.conj() / (a + disc);
            // ṽ as a first column has generators (conj(y), conj(x)).
            let shift = |w: &PhiBlockMatrix| {
                PhiBlockMatrix::from_parts(
                    w.x() - w.y().conjugate() * t,
                    w.y() - w.x().conjugate() * t,
                )
            };
            let before = v2.block_norms_sq()[0];
            let next = shift(&v2);
            gv2 = if next.block_norms_sq()[0] < 0.25 * before {
                apply(&next)?
            } else {
                shift(&gv2)
            };
            v2 = next;
        }
        let a2 = euclid_gram(&v2, &gv2).k1[(0, 0)].re;
        if a2 <= 0.0 {
            return Err(Error::ZeroOmegaNorm { block: j });
        }
        let s = 1.0 / a2.sqrt();
        v2.scale_blocks(&[s]);
        gv2.scale_blocks(&[s]);
        out.push(v2);
        gout.push(gv2);
        kept.push(j);
        let refs: Vec<&PhiBlockMatrix> = std::iter::once(&basis).chain(out.last()).collect();
        basis = PhiBlockMatrix::hcat(&refs)?;
        let grefs: Vec<&PhiBlockMatrix> = std::iter::once(&gbasis).chain(gout.last()).collect();
        gbasis = PhiBlockMatrix::hcat(&grefs)?;
    }
    Ok((basis.blocks(base, basis.k() - base), kept))
}

/// Structured Gram–Schmidt in the `Ω`-inner product, optionally against an
/// `Ω`-orthonormal basis, including the intra-block step.
pub fn omega_orthonormalize(
    p: &BshProblem,
    u: &PhiBlockMatrix,
    against: Option<&PhiBlockMatrix>,
) -> Result<(PhiBlockMatrix, OrthoReport)> {
    let (loss_before, _) = orthogonality_loss(u, Metric::Omega(p));
    let (q, _) = metric_gs(|w| omega_apply(p, w), u, against, None)?;
    let (loss_after, _) = orthogonality_loss(&q, Metric::Omega(p));
    Ok((
        q,
        OrthoReport {
            loss_before,
            loss_after,
            growth_factor: 0.0,
            passes: 2,
            fallback_used: true,
            ..Default::default()
        },
    ))
}

/// Euclidean (identity-metric) variant of [`omega_orthonormalize`].
pub(crate) fn euclid_orthonormalize(
    u: &PhiBlockMatrix,
    drop_tol: Option<f64>,
) -> Result<(PhiBlockMatrix, Vec<usize>)> {
    metric_gs(|w| Ok(w.clone()), u, None, drop_tol)
}

/// Completes a `C`-orthonormal set of blocks in dimension `2n` to `target`
/// blocks with projected unit blocks `Φ(e_j, 0)`.
pub(crate) fn c_complete(q: &PhiBlockMatrix, target: usize, neutral_tol: f64) -> Result<PhiBlockMatrix> {
    let n = q.n();
    let mut cur = q.clone();
    for j in 0..n {
        if cur.k() >= target {
            break;
        }
        let mut e = PhiBlockMatrix::zeros(n, 1);
        let mut ex = e.x().clone();
        ex[(j, 0)] = c(1.0, 0.0);
        e = PhiBlockMatrix::from_parts(ex, e.y().clone());
        let mut v = c_project_against(&e, &cur)?;
        v = c_project_against(&v, &cur)?;
        if v.block_norms_sq()[0] < 1e-4 {
            continue;
        }
        if let Ok(b) = c_normalize_block(&v, neutral_tol.max(1e-3)) {
            cur = PhiBlockMatrix::hcat(&[&cur, &b])?;
        }
    }
    if cur.k() < target {
        return Err(Error::Breakdown(format!(
            "could not complete a C-orthonormal basis to {target} blocks"
        )));
    }
    Ok(cur)
}

/// `||A^H C B||_max` for two structured matrices.
pub(crate) fn c_cross_max(a: &PhiBlockMatrix, b: &PhiBlockMatrix) -> f64 {
    if a.k() == 0 || b.k() == 0 {
        return 0.0;
    }
    let g = c_gram(a, b).expect("same row count");
    linalg::max_abs(&g.g1).max(linalg::max_abs(&g.g2))
}
