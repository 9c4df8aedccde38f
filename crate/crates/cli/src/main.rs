use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};

use scbgd_core::analysis::suites::Suite;
use scbgd_core::harness::{compare_table, export_csv, export_trace, format_float, run_experiment, ExperimentConfig};
use scbgd_core::solvers::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use scbgd_core::{problem_by_name, solve, Error, Method, ResidualMode, SolveResult, SolverConfig};

const USAGE: u8 = 2;
const RUNTIME: u8 = 1;

#[derive(Parser)]
#[command(
    name = "scbgd",
    version,
    about = "Column-block gradient descent for nonlinear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve and print `method problem n IT final_residual seconds converged`.
    Solve(SolveArgs),
    /// Run a configured experiment, write the per-run CSV and print the comparison table.
    Bench(BenchArgs),
    /// Run a named verification suite and print one line per check.
    Verify(VerifyArgs),
    /// Run one solve and write its residual-versus-time trace as CSV.
    Trace(TraceArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem name: broyden, li-tridiagonal, identity or linear:<path>.
    #[arg(long)]
    problem: String,
    /// Number of unknowns.
    #[arg(long)]
    n: usize,
    /// gd, scbgd or rowblock-gd.
    #[arg(long)]
    method: Method,
    /// Block size (ignored by gd).
    #[arg(long, default_value_t = 10)]
    q: usize,
    /// Step-size factor in (0, 2).
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Stop once the residual norm is at most this.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Seed for block sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Residual bookkeeping: auto, full or incremental.
    #[arg(long, default_value = "auto")]
    residual: ResidualMode,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Per-run CSV output (overrides `csv` in the configuration).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Table output file (overrides `table` in the configuration).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Worker threads for repetitions (overrides `workers`).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run.
    #[arg(long, value_parser = PossibleValuesParser::new(Suite::ALL.map(|s| s.as_str())))]
    suite: String,
    /// Seed for the random instances.
    #[arg(long, default_value_t = 2026)]
    seed: u64,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Trace CSV output path.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure {
            code: USAGE,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl ToString) -> Self {
        Failure {
            code: RUNTIME,
            message: e.to_string(),
        }
    }
}

/// Configuration problems are usage errors, everything else is a runtime failure.
fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidConfig(_) | Error::UnknownProblem(_) | Error::Parse { .. } | Error::InvalidProblem(_) => {
            Failure::usage(e)
        }
        other => Failure::runtime(other),
    }
}

fn run_solve(args: &SolveArgs) -> Result<SolveResult, Failure> {
    let problem = problem_by_name(&args.problem, args.n).map_err(classify)?;
    if args.method != Method::Gd && args.q > problem.n() {
        return Err(Failure::usage(format!("--q {} exceeds n = {}", args.q, problem.n())));
    }
    let config = SolverConfig::new(args.method, args.q, args.delta)
        .and_then(|c| c.with_tol(args.tol))
        .map_err(classify)?
        .with_max_iter(args.max_iter)
        .with_seed(args.seed)
        .with_residual_mode(args.residual);
    solve(problem.as_ref(), &config, None).map_err(Failure::runtime)
}

fn summary(args: &SolveArgs, r: &SolveResult) -> String {
    format!(
        "{} {} {} {} {} {} {}",
        args.method,
        args.problem,
        args.n,
        r.iterations,
        format_float(r.final_residual()),
        format_float(r.elapsed.as_secs_f64()),
        r.converged()
    )
}

fn converged_status(r: &SolveResult) -> Result<(), Failure> {
    if r.converged() {
        Ok(())
    } else {
        Err(Failure {
            code: RUNTIME,
            message: format!("did not converge ({})", r.reason),
        })
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let r = run_solve(args)?;
    println!("{}", summary(args, &r));
    converged_status(&r)
}

fn cmd_trace(args: &TraceArgs) -> Result<(), Failure> {
    let r = run_solve(&args.solve)?;
    export_trace(&r, &args.out).map_err(Failure::runtime)?;
    println!("{}", summary(&args.solve, &r));
    converged_status(&r)
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let mut config = ExperimentConfig::from_file(&args.config).map_err(|e| match e {
        Error::Io { .. } => Failure::runtime(e),
        other => Failure::usage(format!("{}: {other}", args.config.display())),
    })?;
    if args.csv.is_some() {
        config.csv = args.csv.clone();
    }
    if args.table.is_some() {
        config.table = args.table.clone();
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    let report = run_experiment(&config).map_err(classify)?;
    if let Some(path) = &config.csv {
        export_csv(&report, path).map_err(Failure::runtime)?;
    }
    let table = compare_table(&report);
    if let Some(path) = &config.table {
        std::fs::write(path, &table).map_err(|e| Failure::runtime(format!("i/o error on {}: {e}", path.display())))?;
    }
    print!("{table}");
    for (cell, run) in report.runs() {
        if let Some(err) = &run.error {
            eprintln!("{} n={} seed={}: {err}", cell.method.label(), cell.n, run.seed);
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = args.suite.parse().map_err(Failure::usage)?;
    let lines = suite.run(args.seed).map_err(Failure::runtime)?;
    for line in &lines {
        println!("{line}");
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::runtime(format!("{failed} of {} checks failed", lines.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Trace(a) => cmd_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("scbgd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
