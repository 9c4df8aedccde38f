//! Stochastic column-block gradient descent for nonlinear systems `f(x) = 0`.
//!
//! Each iteration draws `q` of the `n` coordinates uniformly at random,
//! forms the block gradient `p = J_{:,ξ}(x)^T f(x)` and moves those
//! coordinates by `-η p` with
//! `η = δ ||p||² / ||J_{:,ξ}(x) p||²`, `δ ∈ (0, 2)`.
//! With `ξ` equal to every coordinate this is the full gradient method.
//!
//! - [`problems`]: benchmark systems, linear test systems, finite differences.
//! - [`solvers`]: steps, block sampling and the iteration loop.
//! - [`analysis`]: checks of the descent and expected-decrease properties
//!   and the closed-form rate bounds.
//! - [`harness`]: repeated experiments, CSV export and comparison tables.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use problems::{problem_by_name, ColumnBlock, LinearProblem, LinearProblemSpec, Problem};
pub use solvers::{
    solve, BlockSampler, BlockSelection, Method, ResidualMode, SolveResult, SolverConfig, StepOutcome,
    TerminationReason, TraceSample,
};
