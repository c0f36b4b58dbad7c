//! Loss of C-orthonormality after CGS, CGS2, one-pass and two-pass SVQB on
//! increasingly ill-conditioned structured bases, in units of `u ||Q||²`
//! where `Q` is the output of the respective method.
//!
//! cargo run --example orthogonalization -- [cases]

use bse_lobpcg::ortho::{c_orthonormalize_cgs, svqb_indefinite, DEFAULT_NEUTRAL_TOL};
use bse_lobpcg::problems::gen_ortho_case;

const U: f64 = f64::EPSILON / 2.0;

fn main() -> bse_lobpcg::Result<()> {
    let cases: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(12);
    println!(
        "{:>9} {:>9} {:>10} {:>10} {:>10} {:>10}",
        "rho_U", "kappa(M)", "CGS", "CGS2", "SVQB", "SVQB2"
    );
    let scaled = |r: &(bse_lobpcg::PhiBlockMatrix, bse_lobpcg::ortho::OrthoReport)| {
        r.1.loss_after / (U * r.0.two_norm().powi(2))
    };
    for seed in 0..cases {
        let case = gen_ortho_case(40, 6, seed, 1e4, 1e8)?;
        let cgs1 = c_orthonormalize_cgs(&case.u, 1, DEFAULT_NEUTRAL_TOL)?;
        let cgs2 = c_orthonormalize_cgs(&case.u, 2, DEFAULT_NEUTRAL_TOL)?;
        let sv1 = svqb_indefinite(&case.u, false, DEFAULT_NEUTRAL_TOL)?;
        let sv2 = svqb_indefinite(&case.u, true, DEFAULT_NEUTRAL_TOL)?;
        println!(
            "{:>9.1e} {:>9.1e} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            case.growth,
            case.gram_cond,
            scaled(&cgs1),
            scaled(&cgs2),
            scaled(&sv1),
            scaled(&sv2)
        );
    }
    Ok(())
}
