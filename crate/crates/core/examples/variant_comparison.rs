//! Iteration counts and final residuals of the C, CIHL, Omega-IHL and
//! adaptive variants on the same problems.
//!
//! cargo run --release --example variant_comparison -- [n] [l]

use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::{lobpcg_solve, Preconditioner, SolverConfig, SolverMode};

fn main() -> bse_lobpcg::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(48);
    let l = args.get(1).copied().unwrap_or(4);
    let modes = [SolverMode::C, SolverMode::Cihl, SolverMode::OmegaIhl, SolverMode::Adaptive];
    println!("{:>5} {:>10} {:>6} {:>10} {:>9} {:>7}", "seed", "mode", "iters", "res_max", "ms", "switch");
    for seed in 1..=3 {
        let g = gen_random_definite_bsh(n, seed, 1.0)?;
        let ProblemData::Bsh(p) = g.data else { unreachable!() };
        let t = Preconditioner::diag_a(&p)?;
        for mode in modes {
            let cfg = SolverConfig::new(l).with_tol(1e-12).with_mode(mode).with_seed(seed);
            let start = std::time::Instant::now();
            let sol = lobpcg_solve(&p, &t, &cfg, None)?;
            println!(
                "{seed:>5} {:>10} {:>6} {:>10.2e} {:>9.1} {:>7}",
                mode.name(),
                sol.iterations,
                sol.res_max(),
                start.elapsed().as_secs_f64() * 1e3,
                sol.switch_iter().map_or("-".into(), |s| s.to_string())
            );
        }
    }
    Ok(())
}
