//! Tridiagonal system with a cubic coupling term (root at `x = 1`).
//!
//! With 1-based `k`:
//! `f_1 = 4 (x_1 - x_2^2)`,
//! `f_k = 8 x_k (x_k^2 - x_{k-1}) - 2 (1 - x_k) + 4 (x_k - x_{k+1}^2)` for `1 < k < n`,
//! `f_n = 8 x_n (x_n^2 - x_{n-1}) - 2 (1 - x_n)`.

use smallvec::smallvec;

use super::{ColumnBlock, Problem, RowSupport};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LiTridiagonal {
    n: usize,
}

impl LiTridiagonal {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidProblem(format!(
                "tridiagonal system needs n >= 2, got {n}"
            )));
        }
        Ok(LiTridiagonal { n })
    }
}

impl Problem for LiTridiagonal {
    fn name(&self) -> &str {
        super::LI_TRIDIAGONAL
    }

    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.n
    }

    #[inline]
    fn residual_row(&self, x: &[f64], k: usize) -> f64 {
        let n = self.n;
        if k == 0 {
            return 4.0 * (x[0] - x[1] * x[1]);
        }
        let xk = x[k];
        let cubic = 8.0 * xk * (xk * xk - x[k - 1]) - 2.0 * (1.0 - xk);
        if k + 1 < n {
            cubic + 4.0 * (xk - x[k + 1] * x[k + 1])
        } else {
            cubic
        }
    }

    fn jacobian_column_into(&self, x: &[f64], j: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>) {
        let n = self.n;
        let xj = x[j];
        if j > 0 {
            rows.push(j - 1);
            vals.push(-8.0 * xj);
        }
        rows.push(j);
        vals.push(if j == 0 {
            4.0
        } else if j + 1 < n {
            24.0 * xj * xj - 8.0 * x[j - 1] + 6.0
        } else {
            24.0 * xj * xj - 8.0 * x[j - 1] + 2.0
        });
        if j + 1 < n {
            rows.push(j + 1);
            vals.push(-8.0 * x[j + 1]);
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
        vec![0.5; self.n]
    }
}

pub fn li_residual(x: &[f64]) -> Result<Vec<f64>> {
    Ok(LiTridiagonal::new(x.len())?.residual(x))
}

pub fn li_jacobian_columns(x: &[f64], cols: &[usize]) -> Result<ColumnBlock> {
    LiTridiagonal::new(x.len())?.jacobian_columns(x, cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_at_ones() {
        assert!(li_residual(&[1.0; 9]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_input() {
        assert_eq!(li_residual(&[0.5; 3]).unwrap(), vec![1.0, -1.0, -2.0]);
    }

    #[test]
    fn two_dimensional_zero() {
        assert_eq!(li_residual(&[0.0, 0.0]).unwrap(), vec![0.0, -2.0]);
    }

    #[test]
    fn too_small() {
        assert!(li_residual(&[0.3]).is_err());
    }

    #[test]
    fn interior_diagonal() {
        let block = li_jacobian_columns(&[1.0; 5], &[2]).unwrap();
        assert_eq!(block.column(0)[2], 22.0);
        let block = li_jacobian_columns(&[0.0; 5], &[2]).unwrap();
        assert_eq!(block.column(0), &[0.0, -0.0, 6.0, -0.0, 0.0]);
    }

    #[test]
    fn edge_diagonals() {
        let x = [0.5, 0.7, 0.9];
        let block = li_jacobian_columns(&x, &[0, 2]).unwrap();
        assert_eq!(block.column(0), &[4.0, -8.0 * 0.7, 0.0]);
        assert_eq!(block.column(1), &[0.0, -8.0 * 0.9, 24.0 * 0.81 - 8.0 * 0.7 + 2.0]);
    }
}
