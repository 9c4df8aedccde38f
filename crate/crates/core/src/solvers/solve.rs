use std::fmt;
use std::time::{Duration, Instant};

use super::block::BlockSampler;
use super::residual::ResidualState;
use super::step::{ColumnStepper, RowStepper};
use super::{Method, ResidualMode, SolverConfig};
use crate::error::{Error, Result};
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    Converged,
    IterationCap,
    DegenerateStall,
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::Converged => "converged",
            TerminationReason::IterationCap => "iteration-cap",
            TerminationReason::DegenerateStall => "degenerate-stall",
        })
    }
}

/// Residual norm and elapsed wall time after `iteration` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub iteration: usize,
    pub residual_norm: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub method: Method,
    /// Number of update steps performed, degenerate ones included.
    pub iterations: usize,
    pub reason: TerminationReason,
    /// `||f(x_k)||_2` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// Timed samples at iteration 0, every `time_stride` steps and the final step.
    pub samples: Vec<TraceSample>,
    pub x: Vec<f64>,
    pub elapsed: Duration,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.reason == TerminationReason::Converged
    }

    pub fn final_residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("history holds the initial residual")
    }
}

enum Stepper {
    Full {
        cols: Vec<usize>,
        inner: ColumnStepper,
    },
    Columns {
        sampler: BlockSampler,
        cols: Vec<usize>,
        inner: ColumnStepper,
    },
    Rows {
        sampler: BlockSampler,
        rows: Vec<usize>,
        inner: RowStepper,
    },
}

/// Iterates `config.method()` from `start` (or the problem's default start)
/// until `||f(x_k)||_2 <= tol`, `k >= max_iter`, or `stall_limit`
/// consecutive degenerate steps.
pub fn solve<P: Problem + ?Sized>(problem: &P, config: &SolverConfig, start: Option<&[f64]>) -> Result<SolveResult> {
    let (n, m) = (problem.n(), problem.m());
    let mut x = match start {
        Some(s) if s.len() != n => {
            return Err(Error::InvalidConfig(format!(
                "start point has dimension {}, problem has n = {n}",
                s.len()
            )))
        }
        Some(s) => s.to_vec(),
        None => problem.default_start(),
    };

    let mut stepper = match config.method() {
        Method::Gd => Stepper::Full {
            cols: (0..n).collect(),
            inner: ColumnStepper::new(m),
        },
        Method::Scbgd => Stepper::Columns {
            sampler: BlockSampler::new(n, config.q(), config.seed())?,
            cols: Vec::with_capacity(config.q()),
            inner: ColumnStepper::new(m),
        },
        Method::RowBlockGd => Stepper::Rows {
            sampler: BlockSampler::new(m, config.q(), config.seed())?,
            rows: Vec::with_capacity(config.q()),
            inner: RowStepper::new(m),
        },
    };
    let incremental = match config.residual_mode() {
        ResidualMode::Full => false,
        ResidualMode::Auto | ResidualMode::Incremental => problem.has_row_support(),
    } && config.method() != Method::RowBlockGd;

    let at = |iteration: usize, source: Error| Error::AtIteration {
        iteration,
        source: Box::new(source),
    };

    let clock = Instant::now();
    let mut state = ResidualState::new(problem, &x);
    if !state.is_finite() {
        return Err(at(0, Error::Evaluation("residual at start point".into())));
    }
    let mut norm = state.norm();
    let mut history = Vec::with_capacity(config.max_iter().min(1 << 20) + 1);
    history.push(norm);
    let mut samples = vec![TraceSample {
        iteration: 0,
        residual_norm: norm,
        seconds: 0.0,
    }];

    let stride = config.time_stride();
    let delta = config.delta();
    let mut k = 0usize;
    let mut degenerate_run = 0usize;
    let reason = loop {
        if norm <= config.tol() {
            break TerminationReason::Converged;
        }
        if k >= config.max_iter() {
            break TerminationReason::IterationCap;
        }
        k += 1;

        let step = match &mut stepper {
            Stepper::Full { cols, inner } => {
                column_iteration(problem, &mut x, &mut state, cols, inner, delta, incremental)
            }
            Stepper::Columns { sampler, cols, inner } => {
                sampler.sample_into(cols);
                column_iteration(problem, &mut x, &mut state, cols, inner, delta, incremental)
            }
            Stepper::Rows { sampler, rows, inner } => {
                sampler.sample_into(rows);
                row_iteration(problem, &mut x, &mut state, rows, inner, delta)
            }
        };
        let degenerate = step.map_err(|e| at(k, e))?;

        if degenerate {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
            norm = state.norm();
        }
        history.push(norm);
        if k.is_multiple_of(stride) {
            samples.push(TraceSample {
                iteration: k,
                residual_norm: norm,
                seconds: clock.elapsed().as_secs_f64(),
            });
        }
        if degenerate_run >= config.stall_limit() {
            break TerminationReason::DegenerateStall;
        }
    };
    let elapsed = clock.elapsed();
    if samples.last().is_some_and(|s| s.iteration != k) {
        samples.push(TraceSample {
            iteration: k,
            residual_norm: norm,
            seconds: elapsed.as_secs_f64(),
        });
    }

    Ok(SolveResult {
        method: config.method(),
        iterations: k,
        reason,
        residual_history: history,
        samples,
        x,
        elapsed,
    })
}

/// One column-block update. Returns whether the step was degenerate.
fn column_iteration<P: Problem + ?Sized>(
    problem: &P,
    x: &mut [f64],
    state: &mut ResidualState,
    cols: &[usize],
    stepper: &mut ColumnStepper,
    delta: f64,
    incremental: bool,
) -> Result<bool> {
    let scalars = stepper.evaluate(problem, x, state.values(), cols, delta)?;
    if scalars.degenerate {
        return Ok(true);
    }
    stepper.apply(x, scalars.eta);
    // Past a few columns the full sweep is cheaper; both give identical bits.
    let partial = incremental && cols.len() * 8 < problem.m();
    if !(partial && state.update_columns(problem, x, cols)) {
        state.refresh(problem, x);
    }
    if !state.is_finite() {
        return Err(Error::Evaluation("residual after update".into()));
    }
    Ok(false)
}

fn row_iteration<P: Problem + ?Sized>(
    problem: &P,
    x: &mut [f64],
    state: &mut ResidualState,
    rows: &[usize],
    stepper: &mut RowStepper,
    delta: f64,
) -> Result<bool> {
    let scalars = stepper.evaluate(problem, x, state.values(), rows, delta)?;
    if scalars.degenerate {
        return Ok(true);
    }
    stepper.apply(x, scalars.eta);
    state.refresh(problem, x);
    if !state.is_finite() {
        return Err(Error::Evaluation("residual after update".into()));
    }
    Ok(false)
}
