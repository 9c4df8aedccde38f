//! Residual bookkeeping for the iteration loop.

use super::block::BlockSelection;
use crate::error::{Error, Result};
use crate::problems::Problem;

/// Pairwise sum of squares over a fixed binary tree.
///
/// Every internal node is recomputed from its two children, so the total
/// depends only on the current leaves and never drifts.
#[derive(Debug, Clone)]
struct SquareSumTree {
    size: usize,
    nodes: Vec<f64>,
}

impl SquareSumTree {
    fn new(values: &[f64]) -> Self {
        let size = values.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * size];
        for (slot, v) in nodes[size..].iter_mut().zip(values) {
            *slot = v * v;
        }
        for i in (1..size).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        SquareSumTree { size, nodes }
    }

    fn set(&mut self, i: usize, v: f64) {
        let mut k = self.size + i;
        self.nodes[k] = v * v;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }
}

/// The current residual `f(x)` together with its squared norm.
#[derive(Debug, Clone)]
pub(crate) struct ResidualState {
    f: Vec<f64>,
    tree: SquareSumTree,
    rows: Vec<usize>,
    mark: Vec<bool>,
}

impl ResidualState {
    pub fn new<P: Problem + ?Sized>(problem: &P, x: &[f64]) -> Self {
        let f = problem.residual(x);
        let tree = SquareSumTree::new(&f);
        let m = f.len();
        ResidualState {
            f,
            tree,
            rows: Vec::new(),
            mark: vec![false; m],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn norm(&self) -> f64 {
        self.tree.total().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.tree.total().is_finite()
    }

    /// Full re-evaluation.
    pub fn refresh<P: Problem + ?Sized>(&mut self, problem: &P, x: &[f64]) {
        problem.residual_into(x, &mut self.f);
        self.tree = SquareSumTree::new(&self.f);
    }

    /// Re-evaluates only the rows in the declared supports of `cols`.
    /// Returns `false` when a support is missing.
    pub fn update_columns<P: Problem + ?Sized>(&mut self, problem: &P, x: &[f64], cols: &[usize]) -> bool {
        self.rows.clear();
        for &c in cols {
            let Some(support) = problem.row_support(c) else {
                for &r in &self.rows {
                    self.mark[r] = false;
                }
                return false;
            };
            for r in support {
                if !self.mark[r] {
                    self.mark[r] = true;
                    self.rows.push(r);
                }
            }
        }
        for &r in &self.rows {
            self.mark[r] = false;
            let v = problem.residual_row(x, r);
            self.f[r] = v;
            self.tree.set(r, v);
        }
        true
    }
}

/// `f(x_new)` from `f_old = f(x_old)` when `x_new` differs from `x_old` only
/// on `changed`: rows in the union of the changed columns' supports are
/// recomputed, every other row is copied.
pub fn incremental_residual_update<P: Problem + ?Sized>(
    problem: &P,
    f_old: &[f64],
    x_new: &[f64],
    changed: &[usize],
) -> Result<Vec<f64>> {
    if !problem.has_row_support() {
        return Err(Error::Unsupported(format!(
            "problem `{}` declares no row support",
            problem.name()
        )));
    }
    if f_old.len() != problem.m() || x_new.len() != problem.n() {
        return Err(Error::InvalidConfig("dimension mismatch".into()));
    }
    if !changed.is_empty() {
        BlockSelection::new(changed.to_vec(), problem.n())?;
    }
    let mut f = f_old.to_vec();
    for &c in changed {
        let support = problem
            .row_support(c)
            .ok_or_else(|| Error::Unsupported(format!("column {} has no row support", c + 1)))?;
        for r in support {
            f[r] = problem.residual_row(x_new, r);
        }
    }
    Ok(f)
}
