//! Structure-preserving LOBPCG for definite Bethe–Salpeter Hamiltonians
//! `H = C_n Ω` and, through a unitary equivalence, for symplectic
//! eigenvalues of real symmetric positive definite matrices.

pub mod cli;
pub mod dense;
pub mod error;
pub mod ihl;
pub mod linalg;
pub mod lobpcg;
pub mod ortho;
pub mod problems;
pub mod structured;
pub mod symplectic;

pub use dense::{dense_bse_solve, structured_gram_eig, williamson_dense, StructuredSpectrum, WilliamsonResult};
pub use error::{Error, Result};
pub use lobpcg::{
    adaptive_solve, compute_residuals, default_block_size, lobpcg_solve, ConvergenceHistory, Preconditioner,
    PreconditionerKind, Solution, SolverConfig, SolverMode,
};
pub use structured::{BshProblem, CGramPair, PhiBlockMatrix, PhiGramPair};
pub use symplectic::{spd_to_bsh, symplectic_eigensolve, SymplecticResult};
