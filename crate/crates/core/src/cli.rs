//! Batch front end: `solve-bse`, `solve-symplectic`, `bench` and
//! `generate`. Each solve writes `summary.toml` and `history.csv` into the
//! output directory (`--out`, else `$BSE_LOBPCG_OUT`, else `.`).
//!
//! Exit codes: 0 converged, 2 ran but did not converge, 1 error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::lobpcg::{
    lobpcg_solve, ActiveMetric, ConvergenceHistory, PreconditionerKind, SolverConfig, SolverMode,
};
use crate::problems::{
    self, build_preconditioner, generate_from_spec, load_matrix_market, mtx::atomic_write, MmField, MmFormat,
    MmSymmetry, MmWriteOptions, ProblemData, ProblemKind,
};
use crate::structured::DENSE_CHECK_CAP;
use crate::symplectic::{symplectic_eigensolve, SymplecticDiagnostics};

pub const OUT_DIR_ENV: &str = "BSE_LOBPCG_OUT";
pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNCONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bse-lobpcg", version, about = "Structured LOBPCG for Bethe-Salpeter and symplectic eigenproblems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smallest positive eigenpairs of a definite Bethe-Salpeter Hamiltonian.
    SolveBse(SolveBseArgs),
    /// Smallest symplectic eigenvalues of a real spd matrix.
    SolveSymplectic(SolveSymplecticArgs),
    /// Compare solver variants over a grid of generated problems.
    Bench(BenchArgs),
    /// Write a generated problem as Matrix Market files.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Number of wanted eigenpairs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub l: u64,
    /// Block size (default max(ceil(3l/2), l+5)).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// c | cihl | omega-ihl | adaptive
    #[arg(long, default_value = "adaptive", value_parser = parse_mode)]
    pub mode: SolverMode,
    /// identity | diag-a | block-diag-ab
    #[arg(long, default_value = "diag-a", value_parser = parse_precond)]
    pub precond: PreconditionerKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default $BSE_LOBPCG_OUT, then the current directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative noise injected into C-metric iterates (testing aid).
    #[arg(long, hide = true)]
    pub inject_c_noise: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveBseArgs {
    /// Hermitian block A, Matrix Market
    #[arg(long, requires = "b", conflicts_with = "gen")]
    pub a: Option<PathBuf>,
    /// Symmetric block B, Matrix Market
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// random:<n>:<seed>
    #[arg(long = "gen", required_unless_present = "a")]
    pub gen: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveSymplecticArgs {
    /// Real spd matrix of even order, Matrix Market
    #[arg(long, conflicts_with = "gen")]
    pub m: Option<PathBuf>,
    /// known:<n>:<seed>
    #[arg(long = "gen", required_unless_present = "m")]
    pub gen: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Bse,
    Symplectic,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Comma-separated problem sizes n
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "cihl,adaptive", value_parser = parse_mode)]
    pub modes: Vec<SolverMode>,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub l: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value = "diag-a", value_parser = parse_precond)]
    pub precond: PreconditionerKind,
    /// Output directory (default $BSE_LOBPCG_OUT, then the current directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// random:<n>:<seed> or known:<n>:<seed>
    #[arg(long = "gen")]
    pub gen: String,
    /// Output directory (default $BSE_LOBPCG_OUT, then the current directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<SolverMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_precond(s: &str) -> std::result::Result<PreconditionerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub l: usize,
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: String,
    pub precond: String,
    pub seed: u64,
    pub tau0: f64,
    pub neutral_tol: f64,
    pub slope_monitor_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsEcho {
    pub j_orthogonality: f64,
    pub diagonalization: f64,
    pub trace: f64,
}

impl From<&SymplecticDiagnostics> for DiagnosticsEcho {
    fn from(d: &SymplecticDiagnostics) -> Self {
        Self {
            j_orthogonality: d.j_orthogonality,
            diagonalization: d.diagonalization,
            trace: d.trace,
        }
    }
}

/// Machine-readable result of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub problem: String,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub switch_iter: Option<usize>,
    pub fallbacks: usize,
    pub wall_ms: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Largest relative deviation from a known spectrum, when available.
    pub max_rel_error: Option<f64>,
    pub config: ConfigEcho,
    pub diagnostics: Option<DiagnosticsEcho>,
}

impl RunSummary {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("summary serialization: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("summary parse: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn res_max(&self) -> f64 {
        self.residuals.iter().fold(0.0_f64, |a, &b| a.max(b))
    }
}

/// One line of `history.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub res_max: f64,
    pub mode: String,
    pub reorth: bool,
    pub wall_ms: f64,
}

pub fn history_rows(h: &ConvergenceHistory) -> Vec<HistoryRow> {
    h.records
        .iter()
        .map(|r| HistoryRow {
            iter: r.iter,
            res_max: r.res_max,
            mode: r.mode.label().to_string(),
            reorth: r.reorth,
            wall_ms: r.wall_ms,
        })
        .collect()
}

pub fn render_history(rows: &[HistoryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(format!("history serialization: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(format!("history serialization: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_history(path: &Path) -> Result<Vec<HistoryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<HistoryRow>, _>>()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Mode label used in history files.
pub fn metric_from_label(label: &str) -> Option<ActiveMetric> {
    match label {
        "C" => Some(ActiveMetric::C),
        "Omega" => Some(ActiveMetric::Omega),
        _ => None,
    }
}

pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Result of one solve command: the summary and where it was written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: RunSummary,
    pub out_dir: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.converged {
            EXIT_CONVERGED
        } else {
            EXIT_UNCONVERGED
        }
    }
}

fn config_from(args: &SolverArgs) -> Result<SolverConfig> {
    let l = args.l as usize;
    let mut cfg = SolverConfig::new(l)
        .with_tol(args.tol)
        .with_max_iter(args.max_iter)
        .with_mode(args.mode)
        .with_seed(args.seed);
    if let Some(k) = args.k {
        cfg.k = k;
    }
    cfg.c_metric_noise = args.inject_c_noise;
    cfg.validate()?;
    Ok(cfg)
}

fn echo(cfg: &SolverConfig, n: usize, precond: PreconditionerKind) -> ConfigEcho {
    ConfigEcho {
        l: cfg.l,
        k: cfg.effective_k(n),
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        mode: cfg.mode.name().to_string(),
        precond: precond.name().to_string(),
        seed: cfg.seed,
        tau0: cfg.tau0,
        neutral_tol: cfg.neutral_tol,
        slope_monitor_threshold: cfg.slope_monitor_threshold,
    }
}

fn max_rel_error(found: &[f64], truth: Option<&Vec<f64>>) -> Option<f64> {
    truth.map(|t| {
        found
            .iter()
            .zip(t)
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0_f64, f64::max)
    })
}

fn write_artifacts(dir: &Path, summary: &RunSummary, history: &ConvergenceHistory) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    atomic_write(&dir.join("summary.toml"), summary.to_toml()?.as_bytes())?;
    atomic_write(&dir.join("history.csv"), render_history(&history_rows(history))?.as_bytes())
}

pub fn cmd_solve_bse(args: &SolveBseArgs) -> Result<Outcome> {
    let cfg = config_from(&args.solver)?;
    let g = match (&args.gen, &args.a, &args.b) {
        (Some(spec), _, _) => generate_from_spec(spec)?,
        (None, Some(a), Some(b)) => load_matrix_market(a, Some(b), ProblemKind::Bsh)?,
        _ => return Err(Error::Config("either --gen or both --a and --b are required".into())),
    };
    let ProblemData::Bsh(p) = &g.data else {
        return Err(Error::Config(format!("'{}' is not a Bethe-Salpeter problem", g.provenance)));
    };
    let start = Instant::now();
    let t = build_preconditioner(p, args.solver.precond)?;
    let sol = lobpcg_solve(p, &t, &cfg, None)?;
    let summary = RunSummary {
        command: "solve-bse".into(),
        problem: g.provenance.to_string(),
        n: p.n(),
        converged: sol.converged,
        iterations: sol.iterations,
        switch_iter: sol.switch_iter(),
        fallbacks: sol.history.fallback_count(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        max_rel_error: max_rel_error(&sol.lambda, g.ground_truth.as_ref()),
        eigenvalues: sol.lambda.clone(),
        residuals: sol.residuals.clone(),
        config: echo(&cfg, p.n(), args.solver.precond),
        diagnostics: None,
    };
    let out_dir = resolve_out_dir(args.solver.out.as_deref());
    write_artifacts(&out_dir, &summary, &sol.history)?;
    Ok(Outcome { summary, out_dir })
}

pub fn cmd_solve_symplectic(args: &SolveSymplecticArgs) -> Result<Outcome> {
    let cfg = config_from(&args.solver)?;
    let g = match (&args.gen, &args.m) {
        (Some(spec), _) => generate_from_spec(spec)?,
        (None, Some(m)) => load_matrix_market(m, None, ProblemKind::Spd)?,
        _ => return Err(Error::Config("either --gen or --m is required".into())),
    };
    let ProblemData::Spd(m) = &g.data else {
        return Err(Error::Config(format!("'{}' is not an spd problem", g.provenance)));
    };
    let n = m.nrows() / 2;
    if n <= DENSE_CHECK_CAP && m.clone().cholesky().is_none() {
        return Err(Error::NotDefinite);
    }
    let start = Instant::now();
    let r = symplectic_eigensolve(m, &cfg, args.solver.precond)?;
    let summary = RunSummary {
        command: "solve-symplectic".into(),
        problem: g.provenance.to_string(),
        n,
        converged: r.converged,
        iterations: r.iterations,
        switch_iter: r.history.switch_iter(),
        fallbacks: r.history.fallback_count(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        max_rel_error: max_rel_error(&r.lambda, g.ground_truth.as_ref()),
        eigenvalues: r.lambda.clone(),
        residuals: r.residuals.clone(),
        config: echo(&cfg, n, args.solver.precond),
        diagnostics: Some((&r.diagnostics).into()),
    };
    let out_dir = resolve_out_dir(args.solver.out.as_deref());
    write_artifacts(&out_dir, &summary, &r.history)?;
    Ok(Outcome { summary, out_dir })
}

/// One cell of the benchmark grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub suite: String,
    pub n: usize,
    pub seed: u64,
    pub mode: String,
    pub iterations: usize,
    pub wall_ms: f64,
    pub res_max: f64,
    pub converged: bool,
    pub switch_iter: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub table: String,
    pub out_dir: PathBuf,
}

impl BenchReport {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().all(|r| r.converged) {
            EXIT_CONVERGED
        } else {
            EXIT_UNCONVERGED
        }
    }
}

pub fn render_bench_table(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<11} {:>5} {:>5} {:<10} {:>6} {:>10} {:>11} {:>7}  status",
        "suite", "n", "seed", "mode", "iters", "wall_ms", "res_max", "switch"
    );
    for r in rows {
        let switch = r.switch_iter.map_or("-".to_string(), |v| v.to_string());
        let status = if r.converged { "ok" } else { "NOT CONVERGED *" };
        let _ = writeln!(
            s,
            "{:<11} {:>5} {:>5} {:<10} {:>6} {:>10.1} {:>11.3e} {:>7}  {}",
            r.suite, r.n, r.seed, r.mode, r.iterations, r.wall_ms, r.res_max, switch, status
        );
    }
    s
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport> {
    if args.sizes.is_empty() || args.seeds.is_empty() || args.modes.is_empty() {
        return Err(Error::Config("--sizes, --seeds and --modes must be non-empty".into()));
    }
    let out_dir = resolve_out_dir(args.out.as_deref());
    let suite = match args.suite {
        Suite::Bse => "bse",
        Suite::Symplectic => "symplectic",
    };
    let mut rows = Vec::new();
    for &n in &args.sizes {
        for &seed in &args.seeds {
            let spec = match args.suite {
                Suite::Bse => format!("random:{n}:{seed}"),
                Suite::Symplectic => format!("known:{n}:{seed}"),
            };
            for &mode in &args.modes {
                let solver = SolverArgs {
                    l: args.l,
                    k: None,
                    tol: args.tol,
                    max_iter: args.max_iter,
                    mode,
                    precond: args.precond,
                    seed,
                    out: Some(out_dir.join(format!("{suite}-n{n}-s{seed}-{}", mode.name()))),
                    inject_c_noise: None,
                };
                let outcome = match args.suite {
                    Suite::Bse => cmd_solve_bse(&SolveBseArgs {
                        a: None,
                        b: None,
                        gen: Some(spec.clone()),
                        solver,
                    })?,
                    Suite::Symplectic => cmd_solve_symplectic(&SolveSymplecticArgs {
                        m: None,
                        gen: Some(spec.clone()),
                        solver,
                    })?,
                };
                let s = &outcome.summary;
                rows.push(BenchRow {
                    suite: suite.to_string(),
                    n,
                    seed,
                    mode: mode.name().to_string(),
                    iterations: s.iterations,
                    wall_ms: s.wall_ms,
                    res_max: s.res_max(),
                    converged: s.converged,
                    switch_iter: s.switch_iter,
                });
            }
        }
    }
    let table = render_bench_table(&rows);
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    atomic_write(&out_dir.join("bench.csv"), &bytes)?;
    atomic_write(&out_dir.join("bench.txt"), table.as_bytes())?;
    Ok(BenchReport { rows, table, out_dir })
}

/// Writes `m.mtx` (spd) or `a.mtx` and `b.mtx` (BSH); returns the paths.
pub fn cmd_generate(args: &GenerateArgs) -> Result<Vec<PathBuf>> {
    let g = generate_from_spec(&args.gen)?;
    let dir = resolve_out_dir(args.out.as_deref());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let header = vec![format!("generated by bse-lobpcg from {}", g.provenance)];
    let mut written = Vec::new();
    match &g.data {
        ProblemData::Spd(m) => {
            let path = dir.join("m.mtx");
            let mc: CMat = m.map(|v| c(v, 0.0));
            let opts = MmWriteOptions {
                format: MmFormat::Array,
                field: MmField::Real,
                symmetry: MmSymmetry::Symmetric,
                comments: header,
            };
            problems::write_matrix_market(&path, &mc, &opts)?;
            written.push(path);
        }
        ProblemData::Bsh(p) => {
            for (name, mat, sym) in [
                ("a.mtx", p.a(), MmSymmetry::Hermitian),
                ("b.mtx", p.b(), MmSymmetry::Symmetric),
            ] {
                let path = dir.join(name);
                let opts = MmWriteOptions {
                    format: MmFormat::Array,
                    field: MmField::Complex,
                    symmetry: sym,
                    comments: header.clone(),
                };
                problems::write_matrix_market(&path, mat, &opts)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn print_outcome(o: &Outcome) {
    let s = &o.summary;
    println!("problem     {}", s.problem);
    println!("converged   {}", s.converged);
    println!("iterations  {}", s.iterations);
    if let Some(it) = s.switch_iter {
        println!("switch      iteration {it}");
    }
    println!("res_max     {:.3e}", s.res_max());
    for (i, (l, r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
        println!("  lambda[{i:>3}] = {l:.15e}   res = {r:.2e}");
    }
    if let Some(e) = s.max_rel_error {
        println!("max relative error vs ground truth {e:.3e}");
    }
    println!("artifacts   {}", o.out_dir.display());
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CONVERGED };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::SolveBse(a) => cmd_solve_bse(a).map(|o| {
            print_outcome(&o);
            o.exit_code()
        }),
        Command::SolveSymplectic(a) => cmd_solve_symplectic(a).map(|o| {
            print_outcome(&o);
            o.exit_code()
        }),
        Command::Bench(a) => cmd_bench(a).map(|r| {
            print!("{}", r.table);
            r.exit_code()
        }),
        Command::Generate(a) => cmd_generate(a).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_CONVERGED
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_summary() -> RunSummary {
        RunSummary {
            command: "solve-bse".into(),
            problem: "random:8:1".into(),
            n: 8,
            converged: true,
            iterations: 12,
            switch_iter: None,
            fallbacks: 0,
            wall_ms: 1.25,
            eigenvalues: vec![0.1 + 0.2, 1.0 / 3.0],
            residuals: vec![1e-15, 2.5e-13],
            max_rel_error: Some(1e-16),
            config: echo(&SolverConfig::new(3), 8, PreconditionerKind::DiagA),
            diagnostics: Some(DiagnosticsEcho {
                j_orthogonality: 1e-14,
                diagonalization: 2e-13,
                trace: 3e-16,
            }),
        }
    }

    #[test]
    fn summary_round_trip_is_lossless() {
        let s = sample_summary();
        let text = s.to_toml().unwrap();
        assert_eq!(RunSummary::from_toml(&text).unwrap(), s);
        let mut s2 = s.clone();
        s2.switch_iter = Some(7);
        s2.diagnostics = None;
        s2.max_rel_error = None;
        assert_eq!(RunSummary::from_toml(&s2.to_toml().unwrap()).unwrap(), s2);
    }

    #[test]
    fn k_echo_follows_rule() {
        assert_eq!(sample_summary().config.k, 8);
    }

    #[test]
    fn history_csv_header_and_round_trip() {
        let rows = vec![
            HistoryRow {
                iter: 0,
                res_max: 0.1 + 0.2,
                mode: "C".into(),
                reorth: false,
                wall_ms: 0.5,
            },
            HistoryRow {
                iter: 1,
                res_max: 1.234567890123e-13,
                mode: "Omega".into(),
                reorth: true,
                wall_ms: 1.5,
            },
        ];
        let text = render_history(&rows).unwrap();
        assert!(text.starts_with("iter,res_max,mode,reorth,wall_ms\n"));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<HistoryRow> = rdr.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(back, rows);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["bse-lobpcg", "solve-symplectic", "--gen", "known:5:1", "--l", "0"]), EXIT_ERROR);
        assert_eq!(run(["bse-lobpcg", "bench", "--suite", "bse"]), EXIT_ERROR);
        assert_eq!(run(["bse-lobpcg", "nonsense"]), EXIT_ERROR);
    }
}
