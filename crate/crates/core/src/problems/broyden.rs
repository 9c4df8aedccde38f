//! Broyden tridiagonal system.
//!
//! `f_k(x) = (0.5 x_k - 3) x_k + x_{k-1} + 2 x_{k+1} - 1` with ghost values
//! `x_0 = x_{n+1} = 0` (1-based). The ghosts are boundary data and have
//! nothing to do with the start vector.

use smallvec::smallvec;

use super::{ColumnBlock, Problem, RowSupport};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BroydenTridiagonal {
    n: usize,
}

impl BroydenTridiagonal {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidProblem(format!(
                "broyden tridiagonal needs n >= 2, got {n}"
            )));
        }
        Ok(BroydenTridiagonal { n })
    }
}

impl Problem for BroydenTridiagonal {
    fn name(&self) -> &str {
        super::BROYDEN
    }

    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.n
    }

    #[inline]
    fn residual_row(&self, x: &[f64], k: usize) -> f64 {
        let prev = if k > 0 { x[k - 1] } else { 0.0 };
        let next = if k + 1 < self.n { x[k + 1] } else { 0.0 };
        (0.5 * x[k] - 3.0) * x[k] + prev + 2.0 * next - 1.0
    }

    fn jacobian_column_into(&self, x: &[f64], j: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>) {
        if j > 0 {
            rows.push(j - 1);
            vals.push(2.0);
        }
        rows.push(j);
        vals.push(x[j] - 3.0);
        if j + 1 < self.n {
            rows.push(j + 1);
            vals.push(1.0);
        }
    }

    fn row_support(&self, j: usize) -> Option<RowSupport> {
        let mut s: RowSupport = smallvec![];
        if j > 0 {
            s.push(j - 1);
        }
        s.push(j);
        if j + 1 < self.n {
            s.push(j + 1);
        }
        Some(s)
    }

    fn has_row_support(&self) -> bool {
        true
    }

    fn default_start(&self) -> Vec<f64> {
        vec![-1.5; self.n]
    }
}

/// Broyden tridiagonal residual at `x` (dimension taken from `x`).
pub fn broyden_residual(x: &[f64]) -> Result<Vec<f64>> {
    Ok(BroydenTridiagonal::new(x.len())?.residual(x))
}

/// Broyden tridiagonal Jacobian columns (0-based `cols`) at `x`.
pub fn broyden_jacobian_columns(x: &[f64], cols: &[usize]) -> Result<ColumnBlock> {
    BroydenTridiagonal::new(x.len())?.jacobian_columns(x, cols)
}
