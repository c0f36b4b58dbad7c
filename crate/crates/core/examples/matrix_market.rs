//! Writes a generated problem as Matrix Market files, reads it back and
//! solves the loaded problem.
//!
//! cargo run --example matrix_market -- [dir]

use std::path::PathBuf;

use bse_lobpcg::cli::{cmd_generate, GenerateArgs};
use bse_lobpcg::problems::{load_matrix_market, read_matrix_market, ProblemData, ProblemKind};
use bse_lobpcg::{lobpcg_solve, Preconditioner, SolverConfig};

fn main() -> bse_lobpcg::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("bse-lobpcg-mm-example"));
    let files = cmd_generate(&GenerateArgs {
        gen: "random:24:3".into(),
        out: Some(dir.clone()),
    })?;
    for f in &files {
        let m = read_matrix_market(f)?;
        println!(
            "{}: {}x{} {:?} {:?} {:?}",
            f.display(),
            m.data.nrows(),
            m.data.ncols(),
            m.format,
            m.field,
            m.symmetry
        );
    }
    let g = load_matrix_market(&dir.join("a.mtx"), Some(&dir.join("b.mtx")), ProblemKind::Bsh)?;
    let ProblemData::Bsh(p) = g.data else { unreachable!() };
    let sol = lobpcg_solve(&p, &Preconditioner::diag_a(&p)?, &SolverConfig::new(3).with_tol(1e-12), None)?;
    println!("loaded problem: lambda = {:?}, converged = {}", sol.lambda, sol.converged);
    Ok(())
}
