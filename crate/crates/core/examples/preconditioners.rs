//! Effect of the preconditioner on the iteration count: identity, the
//! diagonal of A, 2x2 blocks of (A, B) diagonals, and a user-supplied
//! exact inverse of A.
//!
//! cargo run --release --example preconditioners

use bse_lobpcg::problems::{gen_known_spectrum_spd, ProblemData};
use bse_lobpcg::{lobpcg_solve, spd_to_bsh, Preconditioner, SolverConfig};

fn main() -> bse_lobpcg::Result<()> {
    let g = gen_known_spectrum_spd(60, 4)?;
    let ProblemData::Spd(m) = &g.data else { unreachable!() };
    let p = spd_to_bsh(m)?;
    let cfg = SolverConfig::new(6).with_tol(1e-12).with_max_iter(300);
    let options = [
        Preconditioner::Identity,
        Preconditioner::diag_a(&p)?,
        Preconditioner::block_diag_ab(&p)?,
        Preconditioner::dense_a_inverse(&p)?,
    ];
    for t in &options {
        let sol = lobpcg_solve(&p, t, &cfg, None)?;
        println!(
            "{:<14} iterations = {:>4}  converged = {:<5}  lambda_1 = {:.12}",
            t.kind_name(),
            sol.iterations,
            sol.converged,
            sol.lambda[0]
        );
    }
    Ok(())
}
