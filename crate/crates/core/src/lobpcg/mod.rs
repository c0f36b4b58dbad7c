//! Structured LOBPCG drivers.
//!
//! Four variants share one loop:
//!
//! * `C`: the whole search space `[Z, P, W]` is orthonormalized by CGS2 in
//!   the `C_n`-inner product and `P` is the classical conjugate direction.
//! * `Cihl`: `[Z, P]` comes C-orthonormal from the IHL update (checked by
//!   a randomized probe), and only `W` is orthonormalized against it
//!   (projection, then truncating SVQB2).
//! * `OmegaIhl`: everything in the `Ω`-inner product.
//! * `Adaptive`: starts as `Cihl` and switches once, for good, to
//!   `OmegaIhl` when the residual stagnates below the monitoring threshold.
//!
//! A near-neutral or singular breakdown during a `C`-metric iteration is
//! answered by redoing that iteration in the `Ω`-inner product.

pub mod monitor;
pub mod precond;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use monitor::{slope, switch_decision, ActiveMetric, ConvergenceHistory, IterationRecord, SolverEvent};
pub use precond::{Preconditioner, PreconditionerKind, UserOperator};

use crate::dense::fix_phases;
use crate::error::{Error, Result};
use crate::ihl::{self, IhlBases};
use crate::linalg::{self, cr, CMat};
use crate::ortho::{self, CgsOptions, DEFAULT_NEUTRAL_TOL};
use crate::structured::{omega_apply, phi_product, BshProblem, PhiBlockMatrix};

/// Blocks whose norm shrinks below this fraction under projection are
/// treated as already contained in the search space.
const DROP_TOL: f64 = 1e-10;
/// Cross term `||[Z,P]^H C W||_max` above which the `W` stage is repeated.
const CROSS_TOL: f64 = 1e-11;
/// Column count of the Gaussian sketch for `||Ω||_2`.
pub const DEFAULT_SKETCH_COLS: usize = 8;
const NORM_SKETCH_SEED: u64 = 0x5eed_0f_0e9a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverMode {
    C,
    Cihl,
    OmegaIhl,
    #[default]
    Adaptive,
}

impl SolverMode {
    pub fn name(self) -> &'static str {
        match self {
            SolverMode::C => "c",
            SolverMode::Cihl => "cihl",
            SolverMode::OmegaIhl => "omega-ihl",
            SolverMode::Adaptive => "adaptive",
        }
    }
}

impl std::str::FromStr for SolverMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" => Ok(Self::C),
            "cihl" => Ok(Self::Cihl),
            "omega-ihl" | "omega_ihl" | "omegaihl" => Ok(Self::OmegaIhl),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub l: usize,
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub tau0: f64,
    pub slope_monitor_threshold: f64,
    /// Short and long secant windows of the switching rule.
    pub slope_windows: (usize, usize),
    pub neutral_tol: f64,
    pub seed: u64,
    pub mode: SolverMode,
    pub norm_sketch_cols: usize,
    /// Test hook: relative size of structured noise added to `Z` after
    /// every `C`-metric iteration, which forces a residual floor.
    #[doc(hidden)]
    pub c_metric_noise: Option<f64>,
}

/// `max(⌈3l/2⌉, l + 5)`.
pub fn default_block_size(l: usize) -> usize {
    (3 * l).div_ceil(2).max(l + 5)
}

impl SolverConfig {
    pub fn new(l: usize) -> Self {
        Self {
            l,
            k: default_block_size(l),
            tol: 1e-14,
            max_iter: 200,
            tau0: 1.49e-8,
            slope_monitor_threshold: 1e-10,
            slope_windows: (5, 10),
            neutral_tol: DEFAULT_NEUTRAL_TOL,
            seed: 0,
            mode: SolverMode::Adaptive,
            norm_sketch_cols: DEFAULT_SKETCH_COLS,
            c_metric_noise: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Config("l must be at least 1".into()));
        }
        if self.k < self.l {
            return Err(Error::Config(format!("k = {} is smaller than l = {}", self.k, self.l)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.norm_sketch_cols == 0 {
            return Err(Error::Config("norm_sketch_cols must be at least 1".into()));
        }
        Ok(())
    }

    /// Block size actually used for a problem of half-dimension `n`.
    pub fn effective_k(&self, n: usize) -> usize {
        self.k.min(n)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// The `l` smallest positive eigenvalues found, ascending.
    pub lambda: Vec<f64>,
    /// `C_n`-normalized eigenvector blocks `Φ(X, Y)` (`l` blocks).
    pub eigvecs: PhiBlockMatrix,
    /// Final `res_i`, `i < l`.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Number of completed iterations.
    pub iterations: usize,
    pub history: ConvergenceHistory,
}

impl Solution {
    pub fn res_max(&self) -> f64 {
        self.residuals.iter().fold(0.0_f64, |a, &b| a.max(b))
    }

    pub fn switch_iter(&self) -> Option<usize> {
        self.history.switch_iter()
    }
}

/// Residual blocks `R = Ω Z − C Z Θ` and the normalized residuals
/// `res_i = ||r_i|| / ((||Ω||_est + θ_i) ||z_i||)`.
pub fn compute_residuals(p: &BshProblem, z: &PhiBlockMatrix, theta: &[f64]) -> Result<(PhiBlockMatrix, Vec<f64>)> {
    let norm = p.omega_norm_estimate(DEFAULT_SKETCH_COLS.min(p.n().max(1)), NORM_SKETCH_SEED);
    compute_residuals_with_norm(p, z, theta, norm)
}

pub fn compute_residuals_with_norm(
    p: &BshProblem,
    z: &PhiBlockMatrix,
    theta: &[f64],
    omega_norm: f64,
) -> Result<(PhiBlockMatrix, Vec<f64>)> {
    if theta.len() != z.k() {
        return Err(Error::dim(format!("{} Ritz values for {} blocks", theta.len(), z.k())));
    }
    let oz = omega_apply(p, z)?;
    let (mut rx, mut ry) = oz.into_parts();
    for (j, &t) in theta.iter().enumerate() {
        rx.column_mut(j).axpy(cr(-t), &z.x().column(j), cr(1.0));
        ry.column_mut(j).axpy(cr(t), &z.y().column(j), cr(1.0));
    }
    let r = PhiBlockMatrix::new(rx, ry)?;
    let rn = r.block_norms_sq();
    let zn = z.block_norms_sq();
    let res = (0..z.k())
        .map(|j| {
            let denom = (omega_norm + theta[j]) * zn[j].sqrt();
            if denom > 0.0 {
                rn[j].sqrt() / denom
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok((r, res))
}

/// Seeded standard complex Gaussian generators `(X⁰, Y⁰)` of width `k`.
pub fn initial_guess(n: usize, k: usize, seed: u64) -> PhiBlockMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = linalg::gaussian_complex(&mut rng, n, k);
    let y = linalg::gaussian_complex(&mut rng, n, k);
    PhiBlockMatrix::from_parts(x, y)
}

/// Runs the variant selected by `cfg.mode`. `init` defaults to
/// [`initial_guess`] with `cfg.seed`.
pub fn lobpcg_solve(
    p: &BshProblem,
    t: &Preconditioner,
    cfg: &SolverConfig,
    init: Option<&PhiBlockMatrix>,
) -> Result<Solution> {
    Driver::new(p, t, cfg)?.run(init)
}

/// Adaptive driver: `Cihl` until stagnation, then `OmegaIhl`.
pub fn adaptive_solve(
    p: &BshProblem,
    t: &Preconditioner,
    cfg: &SolverConfig,
    init: Option<&PhiBlockMatrix>,
) -> Result<Solution> {
    let cfg = cfg.clone().with_mode(SolverMode::Adaptive);
    lobpcg_solve(p, t, &cfg, init)
}

struct State {
    metric: ActiveMetric,
    /// `C`-normalized in the `C` metric, `Ω`-normalized in the `Ω` metric.
    z: PhiBlockMatrix,
    theta: Vec<f64>,
    p: Option<PhiBlockMatrix>,
    /// `[Z, P]` is orthonormal in the active metric.
    p_trusted: bool,
}

struct StepOutcome {
    z: PhiBlockMatrix,
    theta: Vec<f64>,
    p: Option<PhiBlockMatrix>,
    p_trusted: bool,
    reorth: bool,
    dropped: usize,
}

struct Driver<'a> {
    p: &'a BshProblem,
    t: &'a Preconditioner,
    cfg: &'a SolverConfig,
    k: usize,
    omega_norm: f64,
}

fn scale_by(z: &PhiBlockMatrix, theta: &[f64], power: f64) -> PhiBlockMatrix {
    let mut out = z.clone();
    let s: Vec<f64> = theta.iter().map(|t| t.powf(power)).collect();
    out.scale_blocks(&s);
    out
}

fn mix_seed(seed: u64, iter: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(iter as u64 + 1)
}

fn maybe_hcat(parts: &[Option<&PhiBlockMatrix>]) -> Result<PhiBlockMatrix> {
    let present: Vec<&PhiBlockMatrix> = parts.iter().flatten().copied().collect();
    PhiBlockMatrix::hcat(&present)
}

impl<'a> Driver<'a> {
    fn new(p: &'a BshProblem, t: &'a Preconditioner, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n = p.n();
        let k = cfg.effective_k(n);
        if cfg.l > k {
            return Err(Error::Config(format!("l = {} exceeds the dimension n = {n}", cfg.l)));
        }
        let omega_norm = p.omega_norm_estimate(cfg.norm_sketch_cols.min(n.max(1)), NORM_SKETCH_SEED);
        Ok(Self { p, t, cfg, k, omega_norm })
    }

    fn run(&self, init: Option<&PhiBlockMatrix>) -> Result<Solution> {
        let start = Instant::now();
        let n = self.p.n();
        let k = self.k;
        let u0 = match init {
            Some(u) => {
                if u.n() != n || u.k() != k {
                    return Err(Error::dim(format!(
                        "initial block is {}x{} blocks, expected {n}x{k}",
                        u.n(),
                        u.k()
                    )));
                }
                u.clone()
            }
            None => initial_guess(n, k, self.cfg.seed),
        };
        let mut history = ConvergenceHistory::default();
        let mut st = self.initialize(&u0, &mut history)?;
        let mut converged = false;
        let mut last_res = Vec::new();
        let mut iterations = 0;

        for iter in 0..=self.cfg.max_iter {
            let (r, res) = compute_residuals_with_norm(self.p, &st.z, &st.theta, self.omega_norm)?;
            let wanted = &res[..self.cfg.l];
            let res_max = wanted.iter().fold(0.0_f64, |a, &b| a.max(b));
            history.records.push(IterationRecord {
                iter,
                res_max,
                res: wanted.to_vec(),
                theta: st.theta.clone(),
                mode: st.metric,
                reorth: false,
                fallback: false,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
            last_res = wanted.to_vec();
            iterations = iter;
            if res_max <= self.cfg.tol {
                converged = true;
                break;
            }
            if iter == self.cfg.max_iter {
                break;
            }
            if self.cfg.mode == SolverMode::Adaptive
                && st.metric == ActiveMetric::C
                && switch_decision(
                    &history.res_max_series(),
                    self.cfg.slope_monitor_threshold,
                    self.cfg.slope_windows,
                )
            {
                history.events.push(SolverEvent::Switch { iter });
                st = State {
                    metric: ActiveMetric::Omega,
                    z: scale_by(&st.z, &st.theta, -0.5),
                    theta: st.theta,
                    p: None,
                    p_trusted: false,
                };
            }
            let w = self.t.apply(&r)?;
            let outcome = self.step(&st, &w, iter, res_max);
            let (out, fallback) = match outcome {
                Ok(o) => (o, false),
                Err(e) if st.metric == ActiveMetric::C && e.is_c_metric_breakdown() => {
                    history.events.push(SolverEvent::OmegaFallback {
                        iter,
                        reason: e.to_string(),
                    });
                    (self.omega_fallback_step(&st, &w)?, true)
                }
                Err(e) => return Err(e),
            };
            if out.dropped > 0 {
                history.events.push(SolverEvent::Dropped {
                    iter,
                    count: out.dropped,
                });
            }
            if let Some(rec) = history.records.last_mut() {
                rec.reorth = out.reorth;
                rec.fallback = fallback;
            }
            let mut z = out.z;
            if st.metric == ActiveMetric::C {
                if let Some(eps) = self.cfg.c_metric_noise {
                    z = self.add_noise(&z, eps, iter);
                }
            }
            st = State {
                metric: st.metric,
                z,
                theta: out.theta,
                p: out.p,
                p_trusted: out.p_trusted,
            };
        }

        let l = self.cfg.l;
        let mut eigvecs = st.z.blocks(0, l);
        if st.metric == ActiveMetric::Omega {
            eigvecs = scale_by(&eigvecs, &st.theta[..l], 0.5);
        }
        fix_phases(&mut eigvecs);
        Ok(Solution {
            lambda: st.theta[..l].to_vec(),
            eigvecs,
            residuals: last_res,
            converged,
            iterations,
            history,
        })
    }

    fn initial_metric(&self) -> ActiveMetric {
        match self.cfg.mode {
            SolverMode::OmegaIhl => ActiveMetric::Omega,
            _ => ActiveMetric::C,
        }
    }

    fn initialize(&self, u0: &PhiBlockMatrix, history: &mut ConvergenceHistory) -> Result<State> {
        if self.initial_metric() == ActiveMetric::C {
            let attempt = ortho::cgs_core(
                u0,
                CgsOptions {
                    passes: 2,
                    neutral_tol: self.cfg.neutral_tol,
                    drop_tol: None,
                    protect: 0,
                },
            )
            .and_then(|(q, _)| {
                let r = ihl::rayleigh_ritz(self.p, &q)?;
                Ok((phi_product(&q, &r.v_matrix)?, r.theta_plus))
            });
            match attempt {
                Ok((z, theta)) => {
                    return Ok(State {
                        metric: ActiveMetric::C,
                        z,
                        theta,
                        p: None,
                        p_trusted: false,
                    })
                }
                Err(e) if e.is_c_metric_breakdown() => {
                    history.events.push(SolverEvent::OmegaFallback {
                        iter: 0,
                        reason: e.to_string(),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let (q, _) = ortho::omega_orthonormalize(self.p, u0, None)?;
        let r = ihl::rayleigh_ritz_omega(&q)?;
        let z = phi_product(&q, &r.v_matrix)?;
        let metric = self.initial_metric();
        let z = if metric == ActiveMetric::C {
            scale_by(&z, &r.theta_plus, 0.5)
        } else {
            z
        };
        Ok(State {
            metric,
            z,
            theta: r.theta_plus,
            p: None,
            p_trusted: false,
        })
    }

    fn step(&self, st: &State, w: &PhiBlockMatrix, iter: usize, res_max: f64) -> Result<StepOutcome> {
        match (st.metric, self.cfg.mode) {
            (ActiveMetric::Omega, _) => self.omega_step(st, w),
            (ActiveMetric::C, SolverMode::C) => self.c_step(st, w),
            (ActiveMetric::C, _) => self.cihl_step(st, w, iter, res_max),
        }
    }

    /// Plain C variant: CGS2 of `[Z, P, W]`, classical `P`.
    fn c_step(&self, st: &State, w: &PhiBlockMatrix) -> Result<StepOutcome> {
        let k = self.k;
        let u = maybe_hcat(&[Some(&st.z), st.p.as_ref(), Some(w)])?;
        let (basis, _) = ortho::cgs_core(
            &u,
            CgsOptions {
                passes: 2,
                neutral_tol: self.cfg.neutral_tol,
                drop_tol: Some(DROP_TOL),
                protect: k,
            },
        )?;
        let dropped = u.k() - basis.k();
        let r = ihl::rayleigh_ritz(self.p, &basis)?;
        let v1 = r.v_matrix.blocks(0, k);
        let z = phi_product(&basis, &v1)?;
        let m = basis.k();
        let p = if m > k {
            let tail = PhiBlockMatrix::from_parts(
                v1.x().rows(k, m - k).into_owned(),
                v1.y().rows(k, m - k).into_owned(),
            );
            Some(phi_product(&basis.blocks(k, m - k), &tail)?)
        } else {
            None
        };
        Ok(StepOutcome {
            z,
            theta: r.theta_plus[..k].to_vec(),
            p,
            p_trusted: false,
            reorth: true,
            dropped,
        })
    }

    /// Orthonormalizes `tail` against the C-orthonormal `head`: two
    /// projections, removal of blocks that vanish, truncating SVQB2, and one
    /// repeat if the cross term is still visible.
    fn w_stage(&self, head: &PhiBlockMatrix, tail: &PhiBlockMatrix) -> Result<(PhiBlockMatrix, usize)> {
        let orig = tail.block_norms_sq();
        let mut cur = tail.clone();
        for round in 0..2 {
            cur = ortho::c_project_against(&cur, head)?;
            cur = ortho::c_project_against(&cur, head)?;
            if round == 0 {
                let now = cur.block_norms_sq();
                let keep: Vec<usize> = (0..cur.k())
                    .filter(|&j| orig[j] > 0.0 && now[j] > DROP_TOL * DROP_TOL * orig[j])
                    .collect();
                cur = cur.select_blocks(&keep);
            }
            if cur.k() == 0 {
                break;
            }
            cur = ortho::svqb_core(&cur, true, self.cfg.neutral_tol, true)?;
            if ortho::c_cross_max(head, &cur) <= CROSS_TOL {
                break;
            }
        }
        Ok((cur.clone(), tail.k() - cur.k()))
    }

    fn cihl_step(&self, st: &State, w: &PhiBlockMatrix, iter: usize, res_max: f64) -> Result<StepOutcome> {
        let k = self.k;
        let mut reorth = false;
        let mut dropped = 0;
        let (head, extra) = match (&st.p, st.p_trusted) {
            (Some(p), true) => {
                let bases = IhlBases {
                    z: st.z.clone(),
                    p: p.clone(),
                    q: PhiBlockMatrix::zeros(0, 0),
                };
                let check = ihl::selective_reorth_needed(&bases, mix_seed(self.cfg.seed, iter), self.cfg.tau0, res_max);
                if check.needed {
                    reorth = true;
                    let joined = PhiBlockMatrix::hcat(&[&st.z, p])?;
                    let (h, _) = ortho::cgs_core(
                        &joined,
                        CgsOptions {
                            passes: 2,
                            neutral_tol: self.cfg.neutral_tol,
                            drop_tol: Some(DROP_TOL),
                            protect: k,
                        },
                    )?;
                    dropped += joined.k() - h.k();
                    (h, None)
                } else {
                    (PhiBlockMatrix::hcat(&[&st.z, p])?, None)
                }
            }
            (Some(p), false) => (st.z.clone(), Some(p)),
            (None, _) => (st.z.clone(), None),
        };
        let tail = maybe_hcat(&[extra, Some(w)])?;
        let (tail, d) = self.w_stage(&head, &tail)?;
        dropped += d;
        let u = PhiBlockMatrix::hcat(&[&head, &tail])?;
        let r = ihl::rayleigh_ritz(self.p, &u)?;
        let b = ihl::ihl_update_c(&u, &r, k)?;
        Ok(StepOutcome {
            z: b.z,
            theta: r.theta_plus[..k].to_vec(),
            p: (b.p.k() > 0).then_some(b.p),
            p_trusted: true,
            reorth,
            dropped,
        })
    }

    /// `Ω`-metric basis `[Z, P, W]` by Gram–Schmidt with drops; `Z` must
    /// survive intact.
    fn omega_basis(&self, z: &PhiBlockMatrix, p: Option<&PhiBlockMatrix>, w: &PhiBlockMatrix) -> Result<(PhiBlockMatrix, usize)> {
        let u = maybe_hcat(&[Some(z), p, Some(w)])?;
        let (basis, kept) = ortho::metric_gs(|v| omega_apply(self.p, v), &u, None, Some(DROP_TOL))?;
        if kept.len() < self.k || kept[..self.k].iter().enumerate().any(|(i, &j)| i != j) {
            return Err(Error::Breakdown("current iterate lost rank in the Omega-inner product".into()));
        }
        Ok((basis, u.k() - kept.len()))
    }

    fn omega_step(&self, st: &State, w: &PhiBlockMatrix) -> Result<StepOutcome> {
        let (u, dropped) = self.omega_basis(&st.z, st.p.as_ref(), w)?;
        let r = ihl::rayleigh_ritz_omega(&u)?;
        let b = ihl::ihl_update_omega(&u, &r, self.k)?;
        Ok(StepOutcome {
            z: b.z,
            theta: r.theta_plus[..self.k].to_vec(),
            p: (b.p.k() > 0).then_some(b.p),
            p_trusted: true,
            reorth: true,
            dropped,
        })
    }

    /// Redoes a failed `C`-metric iteration in the `Ω`-inner product and
    /// returns `C`-normalized Ritz vectors; `P` is not `C`-orthonormal and
    /// is marked untrusted.
    fn omega_fallback_step(&self, st: &State, w: &PhiBlockMatrix) -> Result<StepOutcome> {
        let z_omega = scale_by(&st.z, &st.theta, -0.5);
        let mut out = self
            .omega_basis(&z_omega, st.p.as_ref(), w)
            .and_then(|(u, dropped)| {
                let r = ihl::rayleigh_ritz_omega(&u)?;
                let b = ihl::ihl_update_omega(&u, &r, self.k)?;
                Ok(StepOutcome {
                    z: b.z,
                    theta: r.theta_plus[..self.k].to_vec(),
                    p: (b.p.k() > 0).then_some(b.p),
                    p_trusted: false,
                    reorth: true,
                    dropped,
                })
            })
            .map_err(|e| Error::Breakdown(format!("Omega-inner-product retry failed: {e}")))?;
        out.z = scale_by(&out.z, &out.theta, 0.5);
        Ok(out)
    }

    fn add_noise(&self, z: &PhiBlockMatrix, eps: f64, iter: usize) -> PhiBlockMatrix {
        let n = z.n();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.cfg.seed ^ 0xA5A5, iter));
        let s = cr(eps / (2.0 * n as f64).sqrt());
        let gx: CMat = linalg::gaussian_complex(&mut rng, n, z.k()) * s;
        let gy: CMat = linalg::gaussian_complex(&mut rng, n, z.k()) * s;
        PhiBlockMatrix::from_parts(z.x() + gx, z.y() + gy)
    }
}
