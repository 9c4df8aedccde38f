//! Single-iteration updates: the column-block step and its relatives.

use super::block::BlockSelection;
use crate::error::{Error, Result};
use crate::problems::{dot, ColumnBlock, Problem};

/// Squared block-gradient norm at or below which a step is degenerate.
pub const DEGENERATE_EPS: f64 = 1e-30;

/// One iteration of a block gradient step.
///
/// `p_raw` is the compact block gradient `B^T f(x)` (one entry per block
/// coordinate), `w = B p_raw`, and `direction` is `-eta * p_raw` scattered
/// into `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub block: BlockSelection,
    pub p_raw: Vec<f64>,
    pub w: Vec<f64>,
    pub eta: f64,
    pub direction: Vec<f64>,
    pub next: Vec<f64>,
    pub degenerate: bool,
}

/// Step size `delta * ||p||^2 / ||w||^2`, or `(0, true)` for a degenerate
/// block gradient.
pub fn compute_step_size(p_raw: &[f64], w: &[f64], delta: f64) -> Result<(f64, bool)> {
    step_size_from_norms(sum_sq(p_raw), sum_sq(w), delta)
}

fn step_size_from_norms(p_norm2: f64, w_norm2: f64, delta: f64) -> Result<(f64, bool)> {
    if !p_norm2.is_finite() || !w_norm2.is_finite() {
        return Err(Error::Evaluation("non-finite block gradient".into()));
    }
    if p_norm2 <= DEGENERATE_EPS {
        return Ok((0.0, true));
    }
    if w_norm2 == 0.0 {
        return Err(Error::NumericalInconsistency(format!(
            "||B p||^2 = 0 with ||p||^2 = {p_norm2:e}"
        )));
    }
    Ok((delta * p_norm2 / w_norm2, false))
}

pub(crate) fn sum_sq(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc + x * x)
}

/// Scalars produced by one kernel evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepScalars {
    pub eta: f64,
    pub degenerate: bool,
}

/// Reusable buffers for column-block steps.
#[derive(Debug, Clone)]
pub(crate) struct ColumnStepper {
    pub block: ColumnBlock,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
}

impl ColumnStepper {
    pub fn new(m: usize) -> Self {
        ColumnStepper {
            block: ColumnBlock::empty(m),
            p: Vec::new(),
            w: vec![0.0; m],
        }
    }

    /// Evaluates block, block gradient `p = B^T f`, image `w = B p` and the
    /// step size for `cols` at `(x, f)`.
    pub fn evaluate<P: Problem + ?Sized>(
        &mut self,
        problem: &P,
        x: &[f64],
        f: &[f64],
        cols: &[usize],
        delta: f64,
    ) -> Result<StepScalars> {
        self.block.fill(problem, x, cols);
        self.p.clear();
        self.p.extend((0..self.block.q()).map(|k| dot(self.block.column(k), f)));
        self.w.resize(problem.m(), 0.0);
        self.block.mul_into(&self.p, &mut self.w);
        let (eta, degenerate) = step_size_from_norms(sum_sq(&self.p), sum_sq(&self.w), delta)?;
        Ok(StepScalars { eta, degenerate })
    }

    /// `x[cols[k]] -= eta * p[k]`.
    pub fn apply(&self, x: &mut [f64], eta: f64) {
        for (&c, &pk) in self.block.columns().iter().zip(&self.p) {
            x[c] += -eta * pk;
        }
    }
}

fn check_point<P: Problem + ?Sized>(problem: &P, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != problem.n() {
        return Err(Error::InvalidConfig(format!(
            "point has dimension {}, problem has n = {}",
            x.len(),
            problem.n()
        )));
    }
    let f = problem.residual(x);
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("residual".into()));
    }
    Ok(f)
}

/// One column-block gradient step from `x` over `block`.
pub fn scbgd_step<P: Problem + ?Sized>(
    problem: &P,
    x: &[f64],
    block: &BlockSelection,
    delta: f64,
) -> Result<StepOutcome> {
    let f = check_point(problem, x)?;
    if block.indices().last().is_some_and(|&i| i >= problem.n()) {
        return Err(Error::InvalidBlock(format!(
            "block {block} outside 1..={}",
            problem.n()
        )));
    }
    let mut stepper = ColumnStepper::new(problem.m());
    let StepScalars { eta, degenerate } = stepper.evaluate(problem, x, &f, block.indices(), delta)?;
    let mut next = x.to_vec();
    if !degenerate {
        stepper.apply(&mut next, eta);
    }
    let scaled: Vec<f64> = stepper.p.iter().map(|&pk| -eta * pk).collect();
    Ok(StepOutcome {
        block: block.clone(),
        p_raw: stepper.p.clone(),
        w: stepper.w.clone(),
        eta,
        direction: block.scatter(&scaled, problem.n()),
        next,
        degenerate,
    })
}

/// Full gradient step: the column-block step with every column selected.
pub fn gd_step<P: Problem + ?Sized>(problem: &P, x: &[f64], delta: f64) -> Result<StepOutcome> {
    scbgd_step(problem, x, &BlockSelection::full(problem.n()), delta)
}

pub(crate) struct RowStepper {
    block: ColumnBlock,
    in_rows: Vec<bool>,
    masked: Vec<f64>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
}

impl RowStepper {
    pub fn new(m: usize) -> Self {
        RowStepper {
            block: ColumnBlock::empty(m),
            in_rows: vec![false; m],
            masked: vec![0.0; m],
            p: Vec::new(),
            w: vec![0.0; m],
        }
    }

    pub fn evaluate<P: Problem + ?Sized>(
        &mut self,
        problem: &P,
        x: &[f64],
        f: &[f64],
        rows: &[usize],
        delta: f64,
    ) -> Result<StepScalars> {
        let all: Vec<usize> = (0..problem.n()).collect();
        self.block.fill(problem, x, &all);
        self.in_rows.iter_mut().for_each(|b| *b = false);
        for &r in rows {
            self.in_rows[r] = true;
        }
        // f restricted to the selected rows.
        for ((mv, &fv), &keep) in self.masked.iter_mut().zip(f).zip(&self.in_rows) {
            *mv = if keep { fv } else { 0.0 };
        }
        self.p.clear();
        self.p
            .extend((0..problem.n()).map(|k| dot(self.block.column(k), &self.masked)));
        self.block.mul_into(&self.p, &mut self.w);
        for (wv, &keep) in self.w.iter_mut().zip(&self.in_rows) {
            if !keep {
                *wv = 0.0;
            }
        }
        let (eta, degenerate) = step_size_from_norms(sum_sq(&self.p), sum_sq(&self.w), delta)?;
        Ok(StepScalars { eta, degenerate })
    }

    pub fn apply(&self, x: &mut [f64], eta: f64) {
        for (xi, &pk) in x.iter_mut().zip(&self.p) {
            *xi += -eta * pk;
        }
    }
}

/// Row-block gradient step over `rows` (0-based indices into `0..m`).
///
/// Uses the gradient of `½||f_rows(x)||^2`, i.e. `p = J_{rows,:}^T f_rows`,
/// and `w = J_{rows,:} p`, with the same step-size rule as the column step.
/// The update touches every coordinate. Here `p_raw` has length `n`, `w` has
/// length `m` (zero outside `rows`) and `block` holds the selected rows.
pub fn rowblock_gd_step<P: Problem + ?Sized>(
    problem: &P,
    x: &[f64],
    rows: &BlockSelection,
    delta: f64,
) -> Result<StepOutcome> {
    let f = check_point(problem, x)?;
    if rows.indices().last().is_some_and(|&i| i >= problem.m()) {
        return Err(Error::InvalidBlock(format!(
            "row block {rows} outside 1..={}",
            problem.m()
        )));
    }
    let mut stepper = RowStepper::new(problem.m());
    let StepScalars { eta, degenerate } = stepper.evaluate(problem, x, &f, rows.indices(), delta)?;
    let mut next = x.to_vec();
    if !degenerate {
        stepper.apply(&mut next, eta);
    }
    Ok(StepOutcome {
        block: rows.clone(),
        p_raw: stepper.p.clone(),
        w: stepper.w.clone(),
        eta,
        direction: stepper.p.iter().map(|&pk| -eta * pk).collect(),
        next,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{BroydenTridiagonal, LiTridiagonal, LinearProblem, LinearProblemSpec};
    use nalgebra::{DMatrix, DVector};

    fn diag12() -> LinearProblem {
        let spec = LinearProblemSpec::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
            DVector::zeros(2),
        )
        .unwrap();
        LinearProblem::new("diag", spec).unwrap()
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(
            compute_step_size(&[3.0, -1.0], &[3.0, -1.0], 1.0).unwrap(),
            (1.0, false)
        );
        let (eta, deg) = compute_step_size(&[1.0, 4.0], &[1.0, 8.0], 1.0).unwrap();
        assert!(!deg);
        assert!((eta - 17.0 / 65.0).abs() < 1e-15);
        assert_eq!(compute_step_size(&[0.0, 0.0], &[0.0], 1.0).unwrap(), (0.0, true));
        assert!(matches!(
            compute_step_size(&[1.0], &[0.0, 0.0], 1.0),
            Err(Error::NumericalInconsistency(_))
        ));
        assert!(compute_step_size(&[f64::NAN], &[1.0], 1.0).is_err());
    }

    #[test]
    fn identity_gd_reaches_rhs() {
        let p = LinearProblem::identity(4, 1.0).unwrap();
        let out = gd_step(&p, &[3.0, -2.0, 0.5, 7.0], 1.0).unwrap();
        assert_eq!(out.eta, 1.0);
        assert_eq!(out.next, vec![1.0; 4]);
    }

    #[test]
    fn diag_example() {
        let out = gd_step(&diag12(), &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(out.p_raw, vec![1.0, 4.0]);
        assert_eq!(out.w, vec![1.0, 8.0]);
        assert!((out.eta - 17.0 / 65.0).abs() < 1e-15);
        assert!((out.next[0] - 48.0 / 65.0).abs() < 1e-15);
        assert!((out.next[1] + 3.0 / 65.0).abs() < 1e-15);
    }

    #[test]
    fn diag_step_minimizes_along_direction() {
        // Brute-force line search over eta on a fine grid.
        let p = diag12();
        let out = gd_step(&p, &[1.0, 1.0], 1.0).unwrap();
        let g = |eta: f64| {
            let x = [1.0 - eta * 1.0, 1.0 - eta * 4.0];
            p.residual(&x).iter().map(|v| v * v).sum::<f64>()
        };
        let best = (0..=100_000)
            .map(|i| i as f64 * 1e-5)
            .min_by(|a, b| g(*a).total_cmp(&g(*b)))
            .unwrap();
        assert!((best - out.eta).abs() < 1e-5);
    }

    #[test]
    fn root_is_degenerate() {
        let p = LiTridiagonal::new(5).unwrap();
        let out = gd_step(&p, &[1.0; 5], 1.0).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.next, vec![1.0; 5]);
        assert_eq!(out.eta, 0.0);
    }

    #[test]
    fn single_identity_column() {
        let p = LinearProblem::identity(5, 2.0).unwrap();
        let x = [0.0, 1.0, -3.0, 4.0, 9.0];
        let out = scbgd_step(&p, &x, &BlockSelection::new(vec![2], 5).unwrap(), 1.0).unwrap();
        assert_eq!(out.next, vec![0.0, 1.0, 2.0, 4.0, 9.0]);
        assert_eq!(out.direction, vec![0.0, 0.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn step_invariants() {
        let p = BroydenTridiagonal::new(12).unwrap();
        let x: Vec<f64> = (0..12).map(|i| -1.5 + 0.1 * i as f64).collect();
        let block = BlockSelection::new(vec![1, 5, 11], 12).unwrap();
        let out = scbgd_step(&p, &x, &block, 0.7).unwrap();
        for (i, (&next, &d)) in out.next.iter().zip(&out.direction).enumerate() {
            assert_eq!(next, x[i] + d);
            if !block.indices().contains(&i) {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn full_block_matches_gd() {
        let p = LiTridiagonal::new(9).unwrap();
        let x: Vec<f64> = (0..9).map(|i| 0.5 + 0.05 * i as f64).collect();
        let a = gd_step(&p, &x, 1.0).unwrap();
        let b = scbgd_step(&p, &x, &BlockSelection::full(9), 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rowblock_full_rows_matches_gd() {
        let p = BroydenTridiagonal::new(8).unwrap();
        let x: Vec<f64> = (0..8).map(|i| -1.0 + 0.2 * i as f64).collect();
        let a = gd_step(&p, &x, 1.0).unwrap();
        let b = rowblock_gd_step(&p, &x, &BlockSelection::full(8), 1.0).unwrap();
        assert_eq!(a.next, b.next);
        assert_eq!(a.eta, b.eta);
    }

    #[test]
    fn rowblock_identity_single_row() {
        let p = LinearProblem::identity(4, 3.0).unwrap();
        let out = rowblock_gd_step(&p, &[0.0; 4], &BlockSelection::new(vec![1], 4).unwrap(), 1.0).unwrap();
        assert_eq!(out.next, vec![0.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn rowblock_single_row_is_scaled_projection() {
        // x+ = x - delta * (a.x - b_i) / ||a||^2 * a
        let a = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 2.0, 0.5, 1.0, 3.0]);
        let b = DVector::from_vec(vec![4.0, -1.0]);
        let p = LinearProblem::new("t", LinearProblemSpec::new(a, b).unwrap()).unwrap();
        let x = [0.3, 0.1, -0.4];
        let delta = 0.8;
        let out = rowblock_gd_step(&p, &x, &BlockSelection::new(vec![0], 2).unwrap(), delta).unwrap();
        let row = [1.0, -2.0, 2.0];
        let r = 0.3 - 0.2 - 0.8 - 4.0;
        for i in 0..3 {
            let expected = x[i] - delta * r / 9.0 * row[i];
            assert!((out.next[i] - expected).abs() < 1e-14);
        }
    }
}
