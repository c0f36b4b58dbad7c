//! Structured Phi(X, Y) blocks: assembly, products, C-Gram and Omega-Gram
//! generators, all checked against the assembled dense matrices.
//!
//! cargo run --example structured_products

use bse_lobpcg::linalg::{apply_signature, gaussian_complex, max_abs};
use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::structured::{c_gram, omega_apply, omega_gram, phi_product};
use bse_lobpcg::PhiBlockMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bse_lobpcg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, k, m) = (6, 3, 2);
    let u = PhiBlockMatrix::new(gaussian_complex(&mut rng, n, k), gaussian_complex(&mut rng, n, k))?;
    let v = PhiBlockMatrix::new(gaussian_complex(&mut rng, k, m), gaussian_complex(&mut rng, k, m))?;

    let prod = phi_product(&u, &v)?;
    let err = max_abs(&(prod.assemble() - u.assemble() * v.assemble()));
    println!("Phi(U) Phi(V) is structured, error vs dense product: {err:.1e}");

    let g = c_gram(&u, &u)?;
    let dense = u.assemble().adjoint() * apply_signature(&u.assemble());
    println!("U^H C U from generators, error: {:.1e}", max_abs(&(g.assemble() - dense)));

    let prob = gen_random_definite_bsh(n, 1, 1.0)?;
    let ProblemData::Bsh(p) = prob.data else { unreachable!() };
    let ou = omega_apply(&p, &u)?;
    println!(
        "Omega U from A, B only, error: {:.1e}",
        max_abs(&(ou.assemble() - p.assemble_omega() * u.assemble()))
    );
    let og = omega_gram(&p, &u, &u)?;
    let dense = u.assemble().adjoint() * p.assemble_omega() * u.assemble();
    println!("U^H Omega U from generators, error: {:.1e}", max_abs(&(og.assemble() - dense)));
    println!(
        "storage: {} complex entries for a {}x{} matrix",
        2 * n * k,
        2 * n,
        2 * k
    );
    Ok(())
}
