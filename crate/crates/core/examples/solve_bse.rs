//! Smallest positive eigenvalues of a random definite Bethe-Salpeter
//! Hamiltonian with the adaptive solver, checked against the dense oracle.
//!
//! cargo run --example solve_bse -- [n] [l] [seed]

use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::{adaptive_solve, dense_bse_solve, Preconditioner, SolverConfig};

fn main() -> bse_lobpcg::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(64);
    let l = args.get(1).copied().unwrap_or(4);
    let seed = args.get(2).copied().unwrap_or(1) as u64;

    let g = gen_random_definite_bsh(n, seed, 1.0)?;
    let ProblemData::Bsh(p) = g.data else { unreachable!() };
    let t = Preconditioner::diag_a(&p)?;
    let cfg = SolverConfig::new(l).with_tol(1e-12).with_seed(seed);

    let start = std::time::Instant::now();
    let sol = adaptive_solve(&p, &t, &cfg, None)?;
    let elapsed = start.elapsed();
    let oracle = dense_bse_solve(&p)?;

    println!("n = {n}, l = {l}, k = {}", cfg.effective_k(n));
    println!(
        "converged = {} after {} iterations ({:.1} ms), switch at {:?}",
        sol.converged,
        sol.iterations,
        elapsed.as_secs_f64() * 1e3,
        sol.switch_iter()
    );
    println!("{:>3}  {:>22}  {:>10}  {:>10}", "i", "lambda", "rel err", "residual");
    for i in 0..l {
        let rel = (sol.lambda[i] - oracle.lambda_plus[i]).abs() / oracle.lambda_plus[i];
        println!("{i:>3}  {:>22.15e}  {rel:>10.2e}  {:>10.2e}", sol.lambda[i], sol.residuals[i]);
    }
    Ok(())
}
