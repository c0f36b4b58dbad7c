//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::Instant;

use bse_lobpcg::ihl::{ihl_update_c, rayleigh_ritz};
use bse_lobpcg::lobpcg::{initial_guess, slope, switch_decision, SolverEvent};
use bse_lobpcg::ortho::{c_orthonormalize_cgs, svqb_indefinite, DEFAULT_NEUTRAL_TOL};
use bse_lobpcg::problems::{gen_known_spectrum_spd, gen_ortho_case, ProblemData};
use bse_lobpcg::structured::phi_product;
use bse_lobpcg::symplectic::trace_min_check;
use bse_lobpcg::{
    adaptive_solve, default_block_size, dense_bse_solve, spd_to_bsh, symplectic_eigensolve,
    PhiBlockMatrix, Preconditioner, PreconditionerKind, SolverConfig,
};
use common::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut worst_err, mut worst_res, mut worst_iter) = (0.0_f64, 0.0_f64, 0usize);
    for i in 0..50u64 {
        let n = [8usize, 16, 32, 64][(i % 4) as usize];
        let p = random_bsh(n, 1000 + i);
        let t = Preconditioner::diag_a(&p).map_err(|e| e.to_string())?;
        let cfg = SolverConfig::new(4).with_tol(1e-12).with_seed(i).with_max_iter(200);
        let sol = adaptive_solve(&p, &t, &cfg, None).map_err(|e| format!("seed {i}: {e}"))?;
        let dense = dense_bse_solve(&p).map_err(|e| e.to_string())?;
        worst_err = worst_err.max(rel_err(&sol.lambda, &dense.lambda_plus[..4]));
        worst_res = worst_res.max(sol.res_max());
        worst_iter = worst_iter.max(sol.iterations);
        if !sol.converged {
            return Err(format!("seed {i} n={n} did not converge, res_max {:.2e}", sol.res_max()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_err <= 1e-10 && worst_res <= 1e-12 && worst_iter <= 200 && secs <= 60.0,
        format!("max rel err {worst_err:.1e}, max res {worst_res:.1e}, max iters {worst_iter}, {secs:.1} s"),
    )
}

fn known_spectrum() -> Outcome {
    let start = Instant::now();
    let truth: Vec<f64> = (1..=20).map(|v| v as f64).collect();
    let (mut worst_err, mut worst_res) = (0.0_f64, 0.0_f64);
    for n in [50usize, 100, 200] {
        let g = gen_known_spectrum_spd(n, 7).map_err(|e| e.to_string())?;
        let ProblemData::Spd(m) = &g.data else {
            return Err("generator returned a BSH problem".into());
        };
        let cfg = SolverConfig::new(20).with_tol(1e-12).with_seed(n as u64);
        let r = symplectic_eigensolve(m, &cfg, PreconditionerKind::DiagA).map_err(|e| e.to_string())?;
        if !r.converged {
            return Err(format!("n={n} did not converge"));
        }
        worst_err = worst_err.max(rel_err(&r.lambda, &truth));
        worst_res = worst_res.max(r.residuals.iter().cloned().fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_err <= 1e-9 && worst_res <= 1e-12 && secs <= 120.0,
        format!("max rel err {worst_err:.1e}, max res {worst_res:.1e}, {secs:.1} s"),
    )
}

fn orthogonalization_bounds() -> Outcome {
    let err = |e: bse_lobpcg::Error| e.to_string();
    let (mut worst_cgs2, mut worst_svqb2) = (0.0_f64, 0.0_f64);
    let mut one_pass_worse = 0;
    let cases = 500;
    for seed in 0..cases as u64 {
        let case = gen_ortho_case(40, 6, seed, 1e4, 1e8).map_err(err)?;
        let scaled = |q: &PhiBlockMatrix| dense_c_loss(q) / (U * q.two_norm().powi(2));
        let (cgs2, _) = c_orthonormalize_cgs(&case.u, 2, DEFAULT_NEUTRAL_TOL).map_err(err)?;
        let (sv1, _) = svqb_indefinite(&case.u, false, DEFAULT_NEUTRAL_TOL).map_err(err)?;
        let (sv2, _) = svqb_indefinite(&case.u, true, DEFAULT_NEUTRAL_TOL).map_err(err)?;
        worst_cgs2 = worst_cgs2.max(scaled(&cgs2));
        worst_svqb2 = worst_svqb2.max(scaled(&sv2));
        if dense_c_loss(&sv1) > dense_c_loss(&sv2) {
            one_pass_worse += 1;
        }
    }
    let frac = one_pass_worse as f64 / cases as f64;
    check(
        worst_cgs2 <= 100.0 && worst_svqb2 <= 100.0 && frac >= 0.9,
        format!(
            "max loss/(u||Q||^2): CGS2 {worst_cgs2:.1}, SVQB2 {worst_svqb2:.1}; one pass worse in {:.1}%",
            100.0 * frac
        ),
    )
}

fn ihl_post_state() -> Outcome {
    let block_err = |a: &PhiBlockMatrix, b: &PhiBlockMatrix, same: bool| {
        let g = dense_c_gram(&a.assemble(), &b.assemble());
        if same {
            max_abs(&(g - signature(a.k())))
        } else {
            max_abs(&g)
        }
    };
    let (mut worst_inv, mut worst_span) = (0.0_f64, 0.0_f64);
    for i in 0..200u64 {
        let n = 12 + (i % 5) as usize * 8;
        let k = 1 + (i % 4) as usize;
        let p = random_bsh(n, 5000 + i);
        let u = c_basis(n, 3 * k, 0.3, 7000 + i);
        let r = rayleigh_ritz(&p, &u).map_err(|e| e.to_string())?;
        let b = ihl_update_c(&u, &r, k).map_err(|e| e.to_string())?;
        worst_inv = worst_inv
            .max(block_err(&b.z, &b.z, true))
            .max(block_err(&b.p, &b.p, true))
            .max(block_err(&b.p, &b.z, false));
        // classical companion block: trailing Ritz coefficients applied to U
        let m = u.k();
        let tail = PhiBlockMatrix::new(
            r.v_matrix.x().view((k, 0), (m - k, k)).into_owned(),
            r.v_matrix.y().view((k, 0), (m - k, k)).into_owned(),
        )
        .map_err(|e| e.to_string())?;
        let p_std = phi_product(&u.blocks(k, m - k), &tail).map_err(|e| e.to_string())?;
        let ours = PhiBlockMatrix::hcat(&[&b.z, &b.p]).unwrap().assemble();
        let std = PhiBlockMatrix::hcat(&[&b.z, &p_std]).unwrap().assemble();
        worst_span = worst_span
            .max(out_of_range(&range(&ours), &std))
            .max(out_of_range(&range(&std), &ours));
    }
    check(
        worst_inv <= 1e-11 && worst_span <= 1e-10,
        format!("max invariant {worst_inv:.1e}, max span residual {worst_span:.1e}"),
    )
}

fn degradation_and_repair() -> Outcome {
    let (mut bound_ok, mut repaired) = (0, 0);
    let mut worst_ratio = 0.0_f64;
    for i in 0..100u64 {
        let n = 8 + (i % 20) as usize;
        let k = 1 + (i % 4) as usize;
        let u = c_basis(n, k, 0.1 + 0.008 * i as f64, 300 + i);
        let t = 4.0 * i as f64 / 100.0;
        let ts: Vec<f64> = (0..k).map(|j| t * (j + 1) as f64 / k as f64).collect();
        let v = hyperbolic_factor(&ts, 900 + i);
        let (eu, ev) = (dense_c_loss(&u), dense_c_loss(&v));
        let (nu, nv) = (u.two_norm().powi(2), v.two_norm().powi(2));
        let z = phi_product(&u, &v).map_err(|e| e.to_string())?;
        let bound = 10.0 * (eu * nv + ev * nu) + 100.0 * U * nu * nv;
        let ez = dense_c_loss(&z);
        worst_ratio = worst_ratio.max(ez / bound);
        if ez <= bound {
            bound_ok += 1;
        }
        let (z2, _) = c_orthonormalize_cgs(&z, 1, DEFAULT_NEUTRAL_TOL).map_err(|e| e.to_string())?;
        if dense_c_loss(&z2) <= 100.0 * U * z2.two_norm().powi(2) {
            repaired += 1;
        }
    }
    check(
        bound_ok == 100 && repaired == 100,
        format!("bound held {bound_ok}/100 (max loss/bound {worst_ratio:.2}), repaired {repaired}/100"),
    )
}

fn switching_logic() -> Outcome {
    // log10 series: -9.75 .. -10.75 over 5 steps, then -10.75 .. -11 over 5
    let logs: Vec<f64> = (0..=10)
        .map(|i| if i <= 5 { -9.75 - 0.2 * i as f64 } else { -10.75 - 0.05 * (i - 5) as f64 })
        .collect();
    let worked: Vec<f64> = logs.iter().map(|v| 10f64.powf(*v)).collect();
    let s5 = slope(&worked, 5).unwrap();
    let s10 = slope(&worked, 10).unwrap();
    let steady: Vec<f64> = (0..=10).map(|i| 10f64.powf(-9.0 - 0.2 * i as f64)).collect();
    let above_gate: Vec<f64> = worked.iter().map(|v| v * 1e3).collect();
    let cases = [
        ((s10 + 0.125).abs() <= 1e-12 && (s5 + 0.05).abs() <= 1e-12, "worked slopes"),
        (switch_decision(&worked, 1e-10, (5, 10)), "s5 > s10/2 switches"),
        (!switch_decision(&steady, 1e-10, (5, 10)), "steady decay does not switch"),
        (!switch_decision(&above_gate, 1e-10, (5, 10)), "gate blocks stagnation above 1e-10"),
        (switch_decision(&[1e-12, 2e-12, 5e-12], 1e-10, (5, 10)), "upward residual switches"),
        (!switch_decision(&[1e-12, 2e-12, 1.5e-12], 1e-10, (5, 10)), "non-maximal rise does not switch"),
        (!switch_decision(&[1e-9, 2e-9, 5e-9], 1e-10, (5, 10)), "gate blocks upward rise above 1e-10"),
    ];
    let failed: Vec<&str> = cases.iter().filter(|c| !c.0).map(|c| c.1).collect();
    check(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} fixtures, s10 = {s10:.4}, s5 = {s5:.4}", cases.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn k_rule() -> Outcome {
    let got: Vec<usize> = [3, 12, 23, 50].iter().map(|&l| default_block_size(l)).collect();
    check(got == [8, 18, 35, 75], format!("k = {got:?}"))
}

fn equivalence_identities() -> Outcome {
    let (mut worst_spec, mut worst_trace) = (0.0_f64, 0.0_f64);
    for i in 0..50u64 {
        let n = 1 + (i as usize * 13) % 64;
        let m = random_spd(n, 40 + i);
        let p = spd_to_bsh(&m).map_err(|e| e.to_string())?;
        worst_spec = worst_spec.max(rel_err(&oracle_positive_spectrum(&p), &oracle_symplectic(&m)));
        let spec = dense_bse_solve(&p).map_err(|e| e.to_string())?;
        let l = n.min(4);
        let z = spec.eigvecs.blocks(0, l);
        let sum: f64 = spec.lambda_plus[..l].iter().sum();
        worst_trace = worst_trace.max(trace_min_check(&p, &z).map_err(|e| e.to_string())? / sum);
    }
    check(
        worst_spec <= 1e-11 && worst_trace <= 1e-9,
        format!("max spectrum rel err {worst_spec:.1e}, max trace rel err {worst_trace:.1e}"),
    )
}

fn breakdown_remedy() -> Outcome {
    let p = random_bsh(32, 4);
    let cfg = SolverConfig::new(3).with_tol(1e-12);
    let k = cfg.effective_k(32);
    let (x, mut y) = initial_guess(32, k, 3).into_parts();
    y.set_column(0, &x.column(0));
    let u0 = PhiBlockMatrix::new(x, y).map_err(|e| e.to_string())?;
    let t = Preconditioner::diag_a(&p).map_err(|e| e.to_string())?;
    let sol = adaptive_solve(&p, &t, &cfg, Some(&u0)).map_err(|e| e.to_string())?;
    let fell_back = sol
        .history
        .events
        .iter()
        .any(|e| matches!(e, SolverEvent::OmegaFallback { .. }));
    check(
        fell_back && sol.history.fallback_count() >= 1 && sol.converged && sol.res_max() <= 1e-12,
        format!(
            "fallbacks {}, converged {}, res_max {:.1e}, iterations {}",
            sol.history.fallback_count(),
            sol.converged,
            sol.res_max(),
            sol.iterations
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("known symplectic spectrum", known_spectrum),
        ("orthogonalization bounds", orthogonalization_bounds),
        ("IHL post-state", ihl_post_state),
        ("multiplicative degradation and repair", degradation_and_repair),
        ("switching logic", switching_logic),
        ("block size rule", k_rule),
        ("equivalence identities", equivalence_identities),
        ("breakdown fallback", breakdown_remedy),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {} {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failures += 1;
                println!("FAIL {} {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
