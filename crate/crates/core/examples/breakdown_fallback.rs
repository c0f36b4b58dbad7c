//! C-metric breakdown and the Omega-metric remedy. The first column of the
//! starting block has `x = y`, so it is exactly C-neutral: C-normalization
//! is impossible, Omega-normalization is not. The solver records the
//! fallback and converges anyway.
//!
//! cargo run --example breakdown_fallback

use bse_lobpcg::lobpcg::{initial_guess, SolverEvent};
use bse_lobpcg::ortho::c_orthonormalize_cgs;
use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::{adaptive_solve, PhiBlockMatrix, Preconditioner, SolverConfig};

fn main() -> bse_lobpcg::Result<()> {
    let g = gen_random_definite_bsh(40, 2, 1.0)?;
    let ProblemData::Bsh(p) = g.data else { unreachable!() };
    let cfg = SolverConfig::new(4).with_tol(1e-12);
    let k = cfg.effective_k(p.n());

    let (mut x, mut y) = initial_guess(p.n(), k, 11).into_parts();
    let col = x.column(0).into_owned();
    y.set_column(0, &col);
    x.set_column(0, &col);
    let u0 = PhiBlockMatrix::new(x, y)?;

    match c_orthonormalize_cgs(&u0, 2, 1e-10) {
        Err(e) => println!("C-metric CGS2 on the starting block: {e}"),
        Ok(_) => println!("C-metric CGS2 unexpectedly succeeded"),
    }

    let t = Preconditioner::diag_a(&p)?;
    let sol = adaptive_solve(&p, &t, &cfg, Some(&u0))?;
    for e in &sol.history.events {
        if let SolverEvent::OmegaFallback { iter, reason } = e {
            println!("fallback at iteration {iter}: {reason}");
        }
    }
    println!(
        "converged = {} after {} iterations, res_max = {:.2e}",
        sol.converged,
        sol.iterations,
        sol.res_max()
    );
    Ok(())
}
