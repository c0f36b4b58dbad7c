//! Test problems with known ground truth, Matrix Market I/O, and
//! preconditioner construction.

pub mod mtx;

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use mtx::{read_matrix_market, write_matrix_market, MmField, MmFormat, MmMatrix, MmSymmetry, MmWriteOptions};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, RMat};
use crate::lobpcg::{Preconditioner, PreconditionerKind};
use crate::structured::{c_gram, BshProblem, PhiBlockMatrix};

#[derive(Clone, Debug)]
pub enum ProblemData {
    Bsh(BshProblem),
    /// Real symmetric positive definite `2n × 2n` matrix.
    Spd(RMat),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub generator: String,
    pub seed: Option<u64>,
    pub params: String,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.generator)?;
        if !self.params.is_empty() {
            write!(f, ":{}", self.params)?;
        }
        if let Some(s) = self.seed {
            write!(f, ":{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedProblem {
    pub data: ProblemData,
    /// Known eigenvalues (ascending) when the construction fixes them.
    pub ground_truth: Option<Vec<f64>>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Bsh,
    Spd,
}

/// `A = H_r + (||H_r||_∞ + ||B_r||_∞ + shift) I`, `B = B_r`, with `H_r`
/// random Hermitian and `B_r` random complex symmetric. `Ω` is strictly
/// diagonally dominant by `shift`.
pub fn gen_random_definite_bsh(n: usize, seed: u64, diag_shift: f64) -> Result<GeneratedProblem> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if !(diag_shift > 0.0) {
        return Err(Error::Config("diag_shift must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = linalg::hermitize(&linalg::gaussian_complex(&mut rng, n, n));
    let g = linalg::gaussian_complex(&mut rng, n, n);
    let b = (&g + g.transpose()) * cr(0.5);
    let shift = linalg::inf_norm(&h) + linalg::inf_norm(&b) + diag_shift;
    let a = &h + CMat::identity(n, n) * cr(shift);
    Ok(GeneratedProblem {
        data: ProblemData::Bsh(BshProblem::new(a, b, true)?),
        ground_truth: None,
        provenance: Provenance {
            generator: "random".into(),
            seed: Some(seed),
            params: format!("{n}"),
        },
    })
}

/// A structured test basis together with its conditioning measures.
#[derive(Clone, Debug)]
pub struct OrthoCase {
    pub u: PhiBlockMatrix,
    /// `ρ_U = ||U||² / ||U^H C U||`.
    pub growth: f64,
    /// Spectral condition number of `U^H C U`.
    pub gram_cond: f64,
}

/// Random `Φ(X, Y)` with `k` blocks, `X = G_1 D W`, `Y = s G_2 D W`: `D`
/// is log-spaced from 1 down to a random floor, `W` a random unitary and
/// `s` either in `[0, 0.7)` or close to 1, where `U` is nearly C-neutral
/// and `ρ_U` grows. Samples are redrawn until `ρ_U ≤ max_growth` and
/// `κ(U^H C U) ≤ max_cond`.
pub fn gen_ortho_case(n: usize, k: usize, seed: u64, max_growth: f64, max_cond: f64) -> Result<OrthoCase> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let decades: f64 = rng.random_range(0.0..3.5);
        let s: f64 = if rng.random_bool(0.5) {
            rng.random_range(0.0..0.7)
        } else {
            1.0 + rng.random_range(-0.3..0.3_f64).powi(3)
        };
        let d = CMat::from_diagonal(&nalgebra::DVector::from_fn(k, |i, _| {
            let t = if k > 1 { i as f64 / (k - 1) as f64 } else { 0.0 };
            cr(10f64.powf(-decades * t))
        }));
        let w = random_unitary(k, &mut rng);
        let dw = &d * &w;
        let x = linalg::gaussian_complex(&mut rng, n, k) * &dw;
        let y = linalg::gaussian_complex(&mut rng, n, k) * &dw * cr(s);
        let u = PhiBlockMatrix::new(x, y)?;
        let m = c_gram(&u, &u)?.assemble();
        let (vals, _) = linalg::herm_eig(&linalg::hermitize(&m));
        let big = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let small = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        let growth = u.two_norm().powi(2) / big;
        let gram_cond = big / small;
        if small > 0.0 && growth <= max_growth && gram_cond <= max_cond {
            return Ok(OrthoCase { u, growth, gram_cond });
        }
    }
    Err(Error::Config("could not sample a basis within the conditioning bounds".into()))
}

/// Haar-like random unitary: a complex Gaussian matrix orthonormalized by
/// two passes of classical Gram–Schmidt.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut u = linalg::gaussian_complex(rng, n, n);
    for j in 0..n {
        for _ in 0..2 {
            if j > 0 {
                let prev = u.columns(0, j).into_owned();
                let coeff = prev.adjoint() * u.column(j);
                let upd = u.column(j) - &prev * coeff;
                u.set_column(j, &upd);
            }
        }
        let nrm = u.column(j).norm();
        u.column_mut(j).scale_mut(1.0 / nrm);
    }
    u
}

/// Orthosymplectic `K = [[Re U, Im U], [−Im U, Re U]]`.
pub fn orthosymplectic_from_unitary(u: &CMat) -> RMat {
    let n = u.nrows();
    let mut k = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = u[(i, j)];
            k[(i, j)] = v.re;
            k[(i, n + j)] = v.im;
            k[(n + i, j)] = -v.im;
            k[(n + i, n + j)] = v.re;
        }
    }
    k
}

/// Symplectic shear acting as `[[ν, c], [0, 1/ν]]` on coordinates
/// `(j, n + j)` and as the identity elsewhere (`j` is 1-based).
pub fn symplectic_shear(n: usize, j: usize, nu: f64, c: f64) -> Result<RMat> {
    if j == 0 || j > n || nu == 0.0 {
        return Err(Error::Config(format!("invalid shear parameters j = {j}, nu = {nu}")));
    }
    let mut l = RMat::identity(2 * n, 2 * n);
    let i = j - 1;
    l[(i, i)] = nu;
    l[(i, n + i)] = c;
    l[(n + i, n + i)] = 1.0 / nu;
    Ok(l)
}

/// `||S^T J S − J||_max`.
pub fn symplectic_defect(s: &RMat) -> f64 {
    let n = s.nrows() / 2;
    let j = linalg::symplectic_unit(n);
    linalg::real_max_abs(&(s.transpose() * &j * s - &j))
}

/// `M = Q diag(D, D) Q^T` with `D = diag(1, …, n)`, `Q = K L`, `K`
/// orthosymplectic from a seeded random unitary and `L` the shear with
/// `(j, ν, c) = (n/5, 1.2, −√(n/5))`. The symplectic eigenvalues are
/// `1, …, n` for any symplectic `Q`.
pub fn gen_known_spectrum_spd(n: usize, seed: u64) -> Result<GeneratedProblem> {
    if n < 5 {
        return Err(Error::Config(format!("known-spectrum generator needs n >= 5, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(n, &mut rng);
    let k = orthosymplectic_from_unitary(&u);
    let ortho_defect = linalg::real_max_abs(&(k.transpose() * &k - RMat::identity(2 * n, 2 * n)));
    let j = n / 5;
    let l = symplectic_shear(n, j, 1.2, -((n / 5) as f64).sqrt())?;
    for (name, defect) in [
        ("K", symplectic_defect(&k)),
        ("K (orthogonality)", ortho_defect),
        ("L", symplectic_defect(&l)),
    ] {
        if defect > 1e-12 {
            return Err(Error::SymplecticCheck(format!("{name} defect {defect:.3e}")));
        }
    }
    let q = k * l;
    let d = RMat::from_diagonal(&nalgebra::DVector::from_iterator(
        2 * n,
        (1..=n).chain(1..=n).map(|v| v as f64),
    ));
    let m = &q * d * q.transpose();
    let m = (&m + m.transpose()) * 0.5;
    Ok(GeneratedProblem {
        data: ProblemData::Spd(m),
        ground_truth: Some((1..=n).map(|v| v as f64).collect()),
        provenance: Provenance {
            generator: "known".into(),
            seed: Some(seed),
            params: format!("{n}"),
        },
    })
}

/// Parses `random:<n>:<seed>` or `known:<n>:<seed>`.
pub fn generate_from_spec(spec: &str) -> Result<GeneratedProblem> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("bad generator spec '{spec}' (expected random:<n>:<seed> or known:<n>:<seed>)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let n: usize = parts[1].parse().map_err(|_| bad())?;
    let seed: u64 = parts[2].parse().map_err(|_| bad())?;
    match parts[0] {
        "random" => gen_random_definite_bsh(n, seed, 1.0),
        "known" => gen_known_spectrum_spd(n, seed),
        _ => Err(bad()),
    }
}

fn real_part_checked(m: &MmMatrix, path: &Path) -> Result<RMat> {
    let scale = linalg::max_abs(&m.data).max(1.0);
    if m.data.iter().any(|v| v.im.abs() > 1e-12 * scale) {
        return Err(Error::Format(format!("{}: expected a real matrix", path.display())));
    }
    Ok(m.data.map(|v| v.re))
}

/// Loads a problem from Matrix Market files: `Spd` reads one real
/// symmetric matrix of even order, `Bsh` reads `A` (Hermitian) and `B`
/// (complex symmetric).
pub fn load_matrix_market(path_a: &Path, path_b: Option<&Path>, kind: ProblemKind) -> Result<GeneratedProblem> {
    let a = read_matrix_market(path_a)?;
    let data = match kind {
        ProblemKind::Spd => {
            if a.symmetry == MmSymmetry::Hermitian && a.field == MmField::Complex {
                return Err(Error::Format(format!("{}: Hermitian marker on an spd input", path_a.display())));
            }
            let m = real_part_checked(&a, path_a)?;
            if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
                return Err(Error::Format(format!(
                    "{}: spd input must be square of even order, got {}x{}",
                    path_a.display(),
                    m.nrows(),
                    m.ncols()
                )));
            }
            let tol = 1e-12 * linalg::real_max_abs(&m).max(1.0);
            let asym = linalg::real_max_abs(&(&m - m.transpose()));
            if asym > tol {
                return Err(Error::Symmetry {
                    which: "M",
                    residual: asym,
                    tolerance: tol,
                });
            }
            ProblemData::Spd(m)
        }
        ProblemKind::Bsh => {
            let path_b = path_b.ok_or_else(|| Error::Config("a BSH problem needs both A and B".into()))?;
            let b = read_matrix_market(path_b)?;
            let complex_sym = |m: &MmMatrix| m.field == MmField::Complex && m.symmetry == MmSymmetry::Symmetric;
            let complex_herm = |m: &MmMatrix| m.field == MmField::Complex && m.symmetry == MmSymmetry::Hermitian;
            if complex_sym(&a) || a.symmetry == MmSymmetry::SkewSymmetric {
                return Err(Error::Format(format!("{}: symmetry marker does not fit a Hermitian A", path_a.display())));
            }
            if complex_herm(&b) || b.symmetry == MmSymmetry::SkewSymmetric {
                return Err(Error::Format(format!("{}: symmetry marker does not fit a symmetric B", path_b.display())));
            }
            ProblemData::Bsh(BshProblem::new(a.data, b.data, true)?)
        }
    };
    Ok(GeneratedProblem {
        data,
        ground_truth: None,
        provenance: Provenance {
            generator: "file".into(),
            seed: None,
            params: match path_b {
                Some(b) => format!("{},{}", path_a.display(), b.display()),
                None => path_a.display().to_string(),
            },
        },
    })
}

pub fn build_preconditioner(p: &BshProblem, kind: PreconditionerKind) -> Result<Preconditioner> {
    match kind {
        PreconditionerKind::Identity => Ok(Preconditioner::Identity),
        PreconditionerKind::DiagA => Preconditioner::diag_a(p),
        PreconditionerKind::BlockDiagAb => Preconditioner::block_diag_ab(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::williamson_dense;
    use crate::structured::PhiBlockMatrix;

    #[test]
    fn random_generator_is_deterministic_and_definite() {
        let a = gen_random_definite_bsh(1, 3, 1.0).unwrap();
        let b = gen_random_definite_bsh(1, 3, 1.0).unwrap();
        let (ProblemData::Bsh(pa), ProblemData::Bsh(pb)) = (&a.data, &b.data) else {
            panic!("expected BSH data");
        };
        assert_eq!(pa.a(), pb.a());
        assert_eq!(pa.b(), pb.b());
        let (vals, _) = linalg::herm_eig(&pa.assemble_omega());
        assert!(vals[0] > 0.0);

        let g = gen_random_definite_bsh(12, 9, 10.0).unwrap();
        let ProblemData::Bsh(p) = g.data else { panic!() };
        let omega = p.assemble_omega();
        for i in 0..24 {
            let off: f64 = (0..24).filter(|&j| j != i).map(|j| omega[(i, j)].norm()).sum();
            assert!(omega[(i, i)].re - off >= 10.0 - 1e-9);
        }
    }

    #[test]
    fn known_spectrum_factors_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(6, &mut rng);
        let k = orthosymplectic_from_unitary(&u);
        assert!(symplectic_defect(&k) < 1e-12);
        assert!(linalg::real_max_abs(&(k.transpose() * &k - RMat::identity(12, 12))) < 1e-12);
        assert!(symplectic_defect(&symplectic_shear(6, 1, 1.2, -1.0).unwrap()) < 1e-15);
    }

    #[test]
    fn known_spectrum_small() {
        let g = gen_known_spectrum_spd(10, 3).unwrap();
        let ProblemData::Spd(m) = &g.data else { panic!() };
        assert!(m.clone().cholesky().is_some());
        let w = williamson_dense(m).unwrap();
        for (i, v) in w.lambda.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-9 * (i + 1) as f64, "{v}");
        }
        assert!(gen_known_spectrum_spd(4, 0).is_err());
    }

    #[test]
    fn generator_specs() {
        assert_eq!(generate_from_spec("random:4:2").unwrap().provenance.to_string(), "random:4:2");
        assert!(generate_from_spec("known:5:1").unwrap().ground_truth.is_some());
        assert!(generate_from_spec("random:4").is_err());
        assert!(generate_from_spec("blah:4:1").is_err());
    }

    #[test]
    fn preconditioner_kinds() {
        let p = BshProblem::new(CMat::identity(2, 2) * cr(2.0), CMat::zeros(2, 2), true).unwrap();
        let t = build_preconditioner(&p, PreconditionerKind::DiagA).unwrap();
        let r = PhiBlockMatrix::new(CMat::identity(2, 1), CMat::identity(2, 1)).unwrap();
        assert_eq!(t.apply(&r).unwrap(), r.scaled(0.5));
    }
}
