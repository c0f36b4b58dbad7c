//! The dense structured eigensolver used as the reference: all positive
//! eigenvalues of `H = C Omega`, the C-orthonormality of the eigenvectors,
//! and the Williamson form of a real spd matrix.
//!
//! cargo run --example dense_oracle

use bse_lobpcg::linalg::max_abs;
use bse_lobpcg::problems::{gen_known_spectrum_spd, gen_random_definite_bsh, ProblemData};
use bse_lobpcg::structured::{c_gram, general_eigenvalues_of_h};
use bse_lobpcg::{dense_bse_solve, williamson_dense};

fn main() -> bse_lobpcg::Result<()> {
    let g = gen_random_definite_bsh(10, 4, 1.0)?;
    let ProblemData::Bsh(p) = g.data else { unreachable!() };
    let s = dense_bse_solve(&p)?;
    let mut general: Vec<f64> = general_eigenvalues_of_h(&p).iter().map(|z| z.re).filter(|&x| x > 0.0).collect();
    // The real embedding returns every eigenvalue twice.
    general.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    general.sort_by(f64::total_cmp);
    println!("{:>3}  {:>20}  {:>20}", "i", "structured", "general eig");
    for (i, (a, b)) in s.lambda_plus.iter().zip(&general).enumerate() {
        println!("{i:>3}  {a:>20.14}  {b:>20.14}");
    }
    let gram = c_gram(&s.eigvecs, &s.eigvecs)?;
    let id = bse_lobpcg::linalg::signature(p.n());
    println!("||Z^H C Z - C||_max = {:.1e}", max_abs(&(gram.assemble() - id)));

    let k = gen_known_spectrum_spd(12, 2)?;
    let ProblemData::Spd(m) = &k.data else { unreachable!() };
    let w = williamson_dense(m)?;
    println!("Williamson values of the known-spectrum matrix: {:?}", w
        .lambda
        .iter()
        .map(|v| format!("{v:.10}"))
        .collect::<Vec<_>>());
    Ok(())
}
