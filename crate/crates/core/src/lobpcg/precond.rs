//! Structured preconditioners `T₊`. Each kind maps `Φ(R_X, R_Y)` to a
//! structured block, so the partner columns are handled implicitly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, UNIT_ROUNDOFF};
use crate::structured::{BshProblem, PhiBlockMatrix};

/// User-supplied action on structured blocks. It must be Hermitian
/// positive definite and map `Φ` blocks to `Φ` blocks.
pub type UserOperator = Arc<dyn Fn(&PhiBlockMatrix) -> PhiBlockMatrix + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PreconditionerKind {
    Identity,
    #[default]
    DiagA,
    BlockDiagAb,
}

impl PreconditionerKind {
    pub fn name(self) -> &'static str {
        match self {
            PreconditionerKind::Identity => "identity",
            PreconditionerKind::DiagA => "diag-a",
            PreconditionerKind::BlockDiagAb => "block-diag-ab",
        }
    }
}

impl std::str::FromStr for PreconditionerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "diag-a" | "diag_a" => Ok(Self::DiagA),
            "block-diag-ab" | "block_diag_ab" => Ok(Self::BlockDiagAb),
            other => Err(Error::Config(format!("unknown preconditioner '{other}'"))),
        }
    }
}

#[derive(Clone)]
pub enum Preconditioner {
    Identity,
    /// `Φ(Diag(A), 0)^{-1}`; stores the diagonal.
    DiagA { d: Vec<f64> },
    /// `Φ(Diag(A), Diag(conj B))^{-1}` as per-index `2 × 2` solves.
    BlockDiagAb { a: Vec<f64>, b: Vec<C64> },
    User(UserOperator),
}

impl fmt::Debug for Preconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preconditioner::Identity => f.write_str("Identity"),
            Preconditioner::DiagA { d } => write!(f, "DiagA(n = {})", d.len()),
            Preconditioner::BlockDiagAb { a, .. } => write!(f, "BlockDiagAb(n = {})", a.len()),
            Preconditioner::User(_) => f.write_str("User"),
        }
    }
}

impl Preconditioner {
    pub fn diag_a(p: &BshProblem) -> Result<Self> {
        let scale = crate::linalg::max_abs(p.a()).max(f64::MIN_POSITIVE);
        let d: Vec<f64> = (0..p.n()).map(|i| p.a()[(i, i)].re).collect();
        for (index, &v) in d.iter().enumerate() {
            if v.abs() < UNIT_ROUNDOFF * scale {
                return Err(Error::SingularPreconditioner { index, value: v.abs() });
            }
        }
        Ok(Preconditioner::DiagA { d })
    }

    pub fn block_diag_ab(p: &BshProblem) -> Result<Self> {
        let scale = crate::linalg::max_abs(p.a()).max(f64::MIN_POSITIVE);
        let a: Vec<f64> = (0..p.n()).map(|i| p.a()[(i, i)].re).collect();
        let b: Vec<C64> = (0..p.n()).map(|i| p.b()[(i, i)]).collect();
        for i in 0..p.n() {
            let det = a[i] * a[i] - b[i].norm_sqr();
            if det.abs() < UNIT_ROUNDOFF * scale * scale {
                return Err(Error::SingularPreconditioner { index: i, value: det.abs() });
            }
        }
        Ok(Preconditioner::BlockDiagAb { a, b })
    }

    /// Wraps an arbitrary structured operator.
    pub fn user<F>(f: F) -> Self
    where
        F: Fn(&PhiBlockMatrix) -> PhiBlockMatrix + Send + Sync + 'static,
    {
        Preconditioner::User(Arc::new(f))
    }

    /// `Φ(A^{-1}, 0)` from a dense inverse of `A`.
    pub fn dense_a_inverse(p: &BshProblem) -> Result<Self> {
        let inv = p.a().clone().try_inverse().ok_or(Error::SingularPreconditioner {
            index: 0,
            value: 0.0,
        })?;
        let inv_c = inv.conjugate();
        Ok(Self::user(move |r| {
            PhiBlockMatrix::from_parts(&inv * r.x(), &inv_c * r.y())
        }))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Preconditioner::Identity => "identity",
            Preconditioner::DiagA { .. } => "diag-a",
            Preconditioner::BlockDiagAb { .. } => "block-diag-ab",
            Preconditioner::User(_) => "user",
        }
    }

    pub fn apply(&self, r: &PhiBlockMatrix) -> Result<PhiBlockMatrix> {
        let n = r.n();
        let check = |len: usize| {
            if len != n {
                Err(Error::dim(format!("preconditioner has n = {len}, block has n = {n}")))
            } else {
                Ok(())
            }
        };
        match self {
            Preconditioner::Identity => Ok(r.clone()),
            Preconditioner::DiagA { d } => {
                check(d.len())?;
                let x = CMat::from_fn(n, r.k(), |i, j| r.x()[(i, j)] / d[i]);
                let y = CMat::from_fn(n, r.k(), |i, j| r.y()[(i, j)] / d[i]);
                Ok(PhiBlockMatrix::from_parts(x, y))
            }
            Preconditioner::BlockDiagAb { a, b } => {
                check(a.len())?;
                let mut x = CMat::zeros(n, r.k());
                let mut y = CMat::zeros(n, r.k());
                for i in 0..n {
                    let det = a[i] * a[i] - b[i].norm_sqr();
                    for j in 0..r.k() {
                        let (rx, ry) = (r.x()[(i, j)], r.y()[(i, j)]);
                        x[(i, j)] = (rx * a[i] - b[i] * ry) / det;
                        y[(i, j)] = (ry * a[i] - b[i].conj() * rx) / det;
                    }
                }
                Ok(PhiBlockMatrix::from_parts(x, y))
            }
            Preconditioner::User(f) => {
                let w = f(r);
                if w.n() != n || w.k() != r.k() {
                    return Err(Error::dim("user preconditioner changed the block shape"));
                }
                Ok(w)
            }
        }
    }
}
