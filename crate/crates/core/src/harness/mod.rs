//! Repeated seeded experiments, CSV export and comparison tables.

mod config;
mod export;

use rayon::prelude::*;

pub use config::{ExperimentConfig, MethodSpec};
pub use export::{
    compare_table, export_csv, export_trace, format_float, write_csv, write_trace, CSV_HEADER, TRACE_HEADER,
};

use crate::error::{Error, Result};
use crate::problems::{problem_by_name, Problem};
use crate::solvers::solve;

/// Outcome of one seeded solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub iterations: usize,
    pub final_residual: f64,
    pub wall_time_s: f64,
    pub converged: bool,
    /// Set when the solver returned an error instead of a result.
    pub error: Option<String>,
}

/// All repetitions of one method at one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub method: MethodSpec,
    pub n: usize,
    /// Block size in effect (`n` for the full gradient method).
    pub q: usize,
    pub runs: Vec<RunRecord>,
}

impl CellReport {
    /// True when every repetition converged.
    pub fn converged(&self) -> bool {
        !self.runs.is_empty() && self.runs.iter().all(|r| r.converged)
    }

    /// Mean iteration count over the converged runs.
    pub fn mean_iterations(&self) -> Option<f64> {
        mean(self.runs.iter().filter(|r| r.converged).map(|r| r.iterations as f64))
    }

    /// Mean wall time over the converged runs.
    pub fn mean_seconds(&self) -> Option<f64> {
        mean(self.runs.iter().filter(|r| r.converged).map(|r| r.wall_time_s))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub problem: String,
    pub dims: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    /// Ordered by method, then dimension, as in the configuration.
    pub cells: Vec<CellReport>,
}

impl BenchmarkReport {
    pub fn empty(problem: impl Into<String>) -> Self {
        BenchmarkReport {
            problem: problem.into(),
            dims: Vec::new(),
            methods: Vec::new(),
            cells: Vec::new(),
        }
    }

    pub fn cell(&self, method: usize, n: usize) -> Option<&CellReport> {
        let col = self.dims.iter().position(|&d| d == n)?;
        self.cells.get(method * self.dims.len() + col)
    }

    pub fn runs(&self) -> impl Iterator<Item = (&CellReport, &RunRecord)> {
        self.cells.iter().flat_map(|c| c.runs.iter().map(move |r| (c, r)))
    }
}

/// Runs one seeded solve from the problem's default start. Solver errors
/// become a failed record.
pub fn run_once(problem: &dyn Problem, method: &MethodSpec, tol: f64, max_iter: usize, seed: u64) -> Result<RunRecord> {
    let config = method.solver_config(tol, max_iter, seed)?;
    Ok(match solve(problem, &config, None) {
        Ok(result) => RunRecord {
            seed,
            iterations: result.iterations,
            final_residual: result.final_residual(),
            wall_time_s: result.elapsed.as_secs_f64(),
            converged: result.converged(),
            error: None,
        },
        Err(e) => RunRecord {
            seed,
            iterations: match &e {
                Error::AtIteration { iteration, .. } => *iteration,
                _ => 0,
            },
            final_residual: f64::NAN,
            wall_time_s: 0.0,
            converged: false,
            error: Some(e.to_string()),
        },
    })
}

/// Runs every (method, n, repetition) with seed `base_seed + repetition`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let problems = config
        .dims
        .iter()
        .map(|&n| problem_by_name(&config.problem, n))
        .collect::<Result<Vec<_>>>()?;
    for method in &config.methods {
        for p in &problems {
            if method.method != crate::Method::Gd && method.q > p.n() {
                return Err(Error::InvalidConfig(format!(
                    "block size q = {} exceeds n = {}",
                    method.q,
                    p.n()
                )));
            }
        }
    }

    let jobs: Vec<(usize, usize, u64)> = (0..config.methods.len())
        .flat_map(|mi| (0..problems.len()).flat_map(move |pi| (0..config.repetitions as u64).map(move |r| (mi, pi, r))))
        .collect();
    let job = |&(mi, pi, rep): &(usize, usize, u64)| {
        let seed = config.base_seed.wrapping_add(rep);
        run_once(
            problems[pi].as_ref(),
            &config.methods[mi],
            config.tol,
            config.max_iter,
            seed,
        )
    };
    let records: Vec<RunRecord> = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(job).collect::<Result<Vec<_>>>())?
    } else {
        jobs.iter().map(job).collect::<Result<Vec<_>>>()?
    };

    let mut records = records.into_iter();
    let mut cells = Vec::with_capacity(config.methods.len() * problems.len());
    for method in &config.methods {
        for p in &problems {
            let (n, m) = (p.n(), p.m());
            let q = method.solver_config(config.tol, config.max_iter, 0)?.effective_q(n, m);
            cells.push(CellReport {
                method: method.clone(),
                n,
                q,
                runs: records.by_ref().take(config.repetitions).collect(),
            });
        }
    }
    Ok(BenchmarkReport {
        problem: config.problem.clone(),
        dims: config.dims.clone(),
        methods: config.methods.clone(),
        cells,
    })
}
