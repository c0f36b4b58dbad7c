//! Smallest symplectic eigenvalues of an spd matrix with known spectrum
//! `1, ..., n`, plus the symplectic diagnostics of the computed basis.
//!
//! cargo run --example symplectic_eigenvalues -- [n] [l] [seed]

use bse_lobpcg::problems::{gen_known_spectrum_spd, ProblemData};
use bse_lobpcg::{symplectic_eigensolve, PreconditionerKind, SolverConfig};

fn main() -> bse_lobpcg::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(100);
    let l = args.get(1).copied().unwrap_or(20);
    let seed = args.get(2).copied().unwrap_or(1) as u64;

    let g = gen_known_spectrum_spd(n, seed)?;
    let ProblemData::Spd(m) = &g.data else { unreachable!() };
    let truth = g.ground_truth.clone().unwrap_or_default();
    let cfg = SolverConfig::new(l).with_tol(1e-12).with_seed(seed);

    let start = std::time::Instant::now();
    let r = symplectic_eigensolve(m, &cfg, PreconditionerKind::DiagA)?;
    println!(
        "n = {n}, l = {l}: converged = {} in {} iterations ({:.0} ms)",
        r.converged,
        r.iterations,
        start.elapsed().as_secs_f64() * 1e3
    );
    let worst = r
        .lambda
        .iter()
        .zip(&truth)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    println!("max relative error vs 1..{l}: {worst:.2e}");
    println!("max residual:                {:.2e}", r.residuals.iter().fold(0.0_f64, |a, &b| a.max(b)));
    println!("S^T J S - J:                 {:.2e}", r.diagnostics.j_orthogonality);
    println!("S^T M S - diag(L, L):        {:.2e}", r.diagnostics.diagonalization);
    println!("trace identity (relative):   {:.2e}", r.diagnostics.trace);
    Ok(())
}
