//! A problem on which the C-metric iteration stagnates: every C-metric
//! iterate is perturbed at relative level 1e-11, so the residual floors
//! there. CIHL stalls, while the adaptive driver detects the stagnation
//! from the residual slopes, switches to the Omega metric and converges.
//!
//! cargo run --example adaptive_switch

use bse_lobpcg::problems::{gen_random_definite_bsh, ProblemData};
use bse_lobpcg::{lobpcg_solve, Preconditioner, SolverConfig, SolverMode};

fn main() -> bse_lobpcg::Result<()> {
    let g = gen_random_definite_bsh(48, 5, 1.0)?;
    let ProblemData::Bsh(p) = g.data else { unreachable!() };
    let t = Preconditioner::diag_a(&p)?;

    for mode in [SolverMode::Cihl, SolverMode::Adaptive] {
        let mut cfg = SolverConfig::new(4).with_tol(1e-12).with_mode(mode).with_max_iter(150);
        cfg.c_metric_noise = Some(1e-11);
        let sol = lobpcg_solve(&p, &t, &cfg, None)?;
        println!(
            "{:<9} converged = {:<5} iterations = {:>3}  res_max = {:.2e}  switch = {:?}",
            mode.name(),
            sol.converged,
            sol.iterations,
            sol.res_max(),
            sol.switch_iter()
        );
        let series = sol.history.res_max_series();
        let tail: Vec<String> = series.iter().rev().take(6).rev().map(|r| format!("{r:.1e}")).collect();
        println!("          last residuals: {}", tail.join(" "));
    }
    Ok(())
}
