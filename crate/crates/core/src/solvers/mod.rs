//! Gradient, column-block and row-block iterations with the shared
//! termination loop.

mod block;
mod residual;
mod solve;
mod step;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use block::{sample_block, BlockSampler, BlockSelection};
pub use residual::incremental_residual_update;
pub use solve::{solve, SolveResult, TerminationReason, TraceSample};
pub use step::{compute_step_size, gd_step, rowblock_gd_step, scbgd_step, StepOutcome, DEGENERATE_EPS};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 200_000;
pub const DEFAULT_STALL_LIMIT: usize = 5_000;
pub const DEFAULT_TIME_STRIDE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Full gradient descent.
    Gd,
    /// Stochastic column-block gradient descent.
    Scbgd,
    /// Stochastic row-block gradient descent.
    RowBlockGd,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Scbgd => "scbgd",
            Method::RowBlockGd => "rowblock-gd",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::Gd => "GD",
            Method::Scbgd => "SCBGD",
            Method::RowBlockGd => "RowBlock-GD",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gd" => Ok(Method::Gd),
            "scbgd" => Ok(Method::Scbgd),
            "rowblock-gd" | "rowblock" | "sgd" => Ok(Method::RowBlockGd),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// How the loop keeps `f(x_k)` current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualMode {
    /// Incremental when the problem declares row supports, full otherwise.
    #[default]
    Auto,
    Full,
    /// Falls back to full re-evaluation when supports are missing.
    Incremental,
}

impl FromStr for ResidualMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ResidualMode::Auto),
            "full" => Ok(ResidualMode::Full),
            "incremental" => Ok(ResidualMode::Incremental),
            other => Err(Error::InvalidConfig(format!("unknown residual mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    method: Method,
    q: usize,
    delta: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
    residual_mode: ResidualMode,
    stall_limit: usize,
    time_stride: usize,
}

impl SolverConfig {
    /// `q` is ignored by [`Method::Gd`]. `delta` must lie in `(0, 2)`.
    pub fn new(method: Method, q: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 2.0) {
            return Err(Error::InvalidConfig(format!("delta = {delta} outside (0, 2)")));
        }
        if method != Method::Gd && q == 0 {
            return Err(Error::InvalidConfig("block size q must be positive".into()));
        }
        Ok(SolverConfig {
            method,
            q,
            delta,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            residual_mode: ResidualMode::Auto,
            stall_limit: DEFAULT_STALL_LIMIT,
            time_stride: DEFAULT_TIME_STRIDE,
        })
    }

    pub fn gd() -> Self {
        Self::new(Method::Gd, 0, 1.0).expect("valid default")
    }

    pub fn scbgd(q: usize, delta: f64) -> Result<Self> {
        Self::new(Method::Scbgd, q, delta)
    }

    pub fn rowblock_gd(q: usize, delta: f64) -> Result<Self> {
        Self::new(Method::RowBlockGd, q, delta)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tolerance {tol} must be finite and >= 0")));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_residual_mode(mut self, mode: ResidualMode) -> Self {
        self.residual_mode = mode;
        self
    }

    /// Consecutive degenerate iterations tolerated before giving up.
    pub fn with_stall_limit(mut self, limit: usize) -> Self {
        self.stall_limit = limit.max(1);
        self
    }

    /// Wall-clock sampling stride, in iterations.
    pub fn with_time_stride(mut self, stride: usize) -> Self {
        self.time_stride = stride.max(1);
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Block size actually used on a problem with `n` columns and `m` rows.
    pub fn effective_q(&self, n: usize, m: usize) -> usize {
        match self.method {
            Method::Gd => n,
            Method::Scbgd => self.q,
            Method::RowBlockGd => self.q.min(m),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn residual_mode(&self) -> ResidualMode {
        self.residual_mode
    }

    pub fn stall_limit(&self) -> usize {
        self.stall_limit
    }

    pub fn time_stride(&self) -> usize {
        self.time_stride
    }
}
