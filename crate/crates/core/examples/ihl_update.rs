//! One Rayleigh-Ritz step followed by the IHL update of the companion
//! block P, compared with the classical choice P = U_tail V_tail: both span
//! the same space together with Z, but the IHL block is C-orthonormal and
//! C-orthogonal to Z without orthogonalizing any long vectors.
//!
//! cargo run --example ihl_update

use bse_lobpcg::ihl::{ihl_update_c, rayleigh_ritz};
use bse_lobpcg::linalg::{cr, max_abs, orthonormal_range, projection_residual, signature};
use bse_lobpcg::lobpcg::initial_guess;
use bse_lobpcg::ortho::{c_orthonormalize_cgs, DEFAULT_NEUTRAL_TOL};
use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::structured::{c_gram, phi_product};
use bse_lobpcg::PhiBlockMatrix;

fn c_err(a: &PhiBlockMatrix, b: &PhiBlockMatrix, same: bool) -> bse_lobpcg::Result<f64> {
    let g = c_gram(a, b)?.assemble();
    Ok(if same { max_abs(&(g - signature(a.k()))) } else { max_abs(&g) })
}

fn main() -> bse_lobpcg::Result<()> {
    let (n, k) = (30, 4);
    let g = gen_random_definite_bsh(n, 8, 1.0)?;
    let ProblemData::Bsh(p) = g.data else { unreachable!() };
    let (x, y) = initial_guess(n, 3 * k, 2).into_parts();
    let start = PhiBlockMatrix::new(x, y * cr(0.3))?;
    let (u, _) = c_orthonormalize_cgs(&start, 2, DEFAULT_NEUTRAL_TOL)?;

    let r = rayleigh_ritz(&p, &u)?;
    let b = ihl_update_c(&u, &r, k)?;
    println!("Ritz values: {:?}", &r.theta_plus[..k]);
    println!("||Z^H C Z - C|| = {:.1e}", c_err(&b.z, &b.z, true)?);
    println!("||P^H C P - C|| = {:.1e}", c_err(&b.p, &b.p, true)?);
    println!("||P^H C Z||     = {:.1e}", c_err(&b.p, &b.z, false)?);

    let v = &r.v_matrix;
    let tail = PhiBlockMatrix::new(
        v.x().view((k, 0), (2 * k, k)).into_owned(),
        v.y().view((k, 0), (2 * k, k)).into_owned(),
    )?;
    let p_std = phi_product(&u.blocks(k, 2 * k), &tail)?;
    println!("classical P: ||P^H C P - C|| = {:.1e}", c_err(&p_std, &p_std, true)?);
    let ours = PhiBlockMatrix::hcat(&[&b.z, &b.p])?.assemble();
    let std = PhiBlockMatrix::hcat(&[&b.z, &p_std])?.assemble();
    println!(
        "span([Z, P_ihl]) vs span([Z, P_classical]): {:.1e}",
        projection_residual(&orthonormal_range(&ours, 1e-12), &std)
    );
    Ok(())
}
