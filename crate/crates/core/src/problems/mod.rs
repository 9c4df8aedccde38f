//! Residual maps `f: R^n -> R^m` with column-wise Jacobian access.
//!
//! Indices are 0-based inside the library. Everything that crosses a file or
//! command-line boundary uses 1-based indices.

mod broyden;
mod fd;
mod linear;
mod tridiagonal;

use std::sync::Arc;

use nalgebra::DMatrix;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use broyden::{broyden_jacobian_columns, broyden_residual, BroydenTridiagonal};
pub use fd::{finite_difference_column, FD_STEP};
pub use linear::{LinearProblem, LinearProblemSpec};
pub use tridiagonal::{li_jacobian_columns, li_residual, LiTridiagonal};

/// Sorted row indices where a Jacobian column may be nonzero.
pub type RowSupport = SmallVec<[usize; 4]>;

/// A differentiable residual map with column-block Jacobian access.
///
/// Implementations are immutable after construction and evaluate every
/// residual row with the same arithmetic whether the row is computed alone or
/// as part of a full sweep, so partial re-evaluation is bitwise-consistent
/// with full re-evaluation.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    /// Input dimension.
    fn n(&self) -> usize;

    /// Output dimension.
    fn m(&self) -> usize;

    /// Row `row` of `f(x)`.
    fn residual_row(&self, x: &[f64], row: usize) -> f64;

    fn residual_into(&self, x: &[f64], out: &mut [f64]) {
        for (row, slot) in out.iter_mut().enumerate() {
            *slot = self.residual_row(x, row);
        }
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        self.residual_into(x, &mut out);
        out
    }

    /// Appends the structurally nonzero entries of column `col` of the
    /// Jacobian at `x`, rows ascending.
    fn jacobian_column_into(&self, x: &[f64], col: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>);

    /// Declared row support of column `col`, if the problem has one.
    fn row_support(&self, col: usize) -> Option<RowSupport> {
        let _ = col;
        None
    }

    fn has_row_support(&self) -> bool {
        false
    }

    fn default_start(&self) -> Vec<f64>;

    /// Jacobian columns `cols` at `x`, validating the index set.
    fn jacobian_columns(&self, x: &[f64], cols: &[usize]) -> Result<ColumnBlock> {
        validate_columns(cols, self.n())?;
        let mut block = ColumnBlock::empty(self.m());
        block.fill(self, x, cols);
        Ok(block)
    }

    /// The full `m x n` Jacobian as a dense matrix.
    fn dense_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.n()).collect();
        let mut block = ColumnBlock::empty(self.m());
        block.fill(self, x, &cols);
        block.to_dense()
    }
}

pub(crate) fn validate_columns(cols: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &c in cols {
        if c >= n {
            return Err(Error::InvalidBlock(format!("column index {} outside 1..={n}", c + 1)));
        }
        if std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidBlock(format!("duplicate column index {}", c + 1)));
        }
    }
    Ok(())
}

/// A dense `m x q` Jacobian column block, column-major.
///
/// Problems report each column as a short list of structurally nonzero
/// entries; the block scatters them into dense storage so the step
/// arithmetic is plain dense linear algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBlock {
    m: usize,
    cols: Vec<usize>,
    data: Vec<f64>,
    scratch_rows: Vec<usize>,
    scratch_vals: Vec<f64>,
}

impl ColumnBlock {
    pub fn empty(m: usize) -> Self {
        ColumnBlock {
            m,
            cols: Vec::new(),
            data: Vec::new(),
            scratch_rows: Vec::new(),
            scratch_vals: Vec::new(),
        }
    }

    /// Re-evaluates the block in place for columns `cols` (assumed valid).
    pub fn fill<P: Problem + ?Sized>(&mut self, problem: &P, x: &[f64], cols: &[usize]) {
        let m = problem.m();
        self.m = m;
        self.cols.clear();
        self.cols.extend_from_slice(cols);
        self.data.clear();
        self.data.resize(m * cols.len(), 0.0);
        for (k, &c) in cols.iter().enumerate() {
            self.scratch_rows.clear();
            self.scratch_vals.clear();
            problem.jacobian_column_into(x, c, &mut self.scratch_rows, &mut self.scratch_vals);
            let column = &mut self.data[k * m..(k + 1) * m];
            for (&r, &v) in self.scratch_rows.iter().zip(&self.scratch_vals) {
                column[r] = v;
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.cols.len()
    }

    /// Global column indices of the block, in block order.
    pub fn columns(&self) -> &[usize] {
        &self.cols
    }

    /// The `k`-th block column as a dense `m`-vector.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.m..(k + 1) * self.m]
    }

    /// `B^T v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.q()).map(|k| dot(self.column(k), v)).collect()
    }

    /// `B p`.
    pub fn mul(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.mul_into(p, &mut out);
        out
    }

    /// `out = B p`.
    pub fn mul_into(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &pk) in p.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(k)) {
                *o += a * pk;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.m, self.q(), &self.data)
    }
}

/// Left-to-right dot product; every caller sums in the same order.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub const BROYDEN: &str = "broyden";
pub const LI_TRIDIAGONAL: &str = "li-tridiagonal";
pub const IDENTITY: &str = "identity";

/// Names accepted by [`problem_by_name`] besides `linear:<path>`.
pub const REGISTERED: &[&str] = &[BROYDEN, LI_TRIDIAGONAL, IDENTITY];

/// Looks up a problem by registry name.
///
/// `broyden` and `li-tridiagonal` are the two benchmark systems, `identity`
/// is `f(x) = x - 1` and `linear:<path>` loads a linear system from a text
/// file (see [`LinearProblemSpec::from_text`]).
pub fn problem_by_name(name: &str, n: usize) -> Result<Arc<dyn Problem>> {
    match name {
        BROYDEN | "broyden-tridiagonal" => Ok(Arc::new(BroydenTridiagonal::new(n)?)),
        LI_TRIDIAGONAL | "tridiagonal" => Ok(Arc::new(LiTridiagonal::new(n)?)),
        IDENTITY => Ok(Arc::new(LinearProblem::identity(n, 1.0)?)),
        other => match other.strip_prefix("linear:") {
            Some(path) => {
                let spec = LinearProblemSpec::from_file(path)?;
                if spec.n() != n {
                    return Err(Error::InvalidProblem(format!(
                        "{path} has n = {}, requested n = {n}",
                        spec.n()
                    )));
                }
                Ok(Arc::new(LinearProblem::new(other, spec)?))
            }
            None => Err(Error::UnknownProblem(other.to_string())),
        },
    }
}

/// Default start point for a registered problem.
pub fn default_start(name: &str, n: usize) -> Result<Vec<f64>> {
    match name {
        BROYDEN | "broyden-tridiagonal" => Ok(vec![-1.5; n]),
        LI_TRIDIAGONAL | "tridiagonal" => Ok(vec![0.5; n]),
        IDENTITY => Ok(vec![0.0; n]),
        other if other.starts_with("linear:") => Ok(vec![0.0; n]),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}
