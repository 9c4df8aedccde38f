//! Numerical checks of the convergence theory.
//!
//! Region-wide constants are only computable exactly for linear residuals,
//! so everything here except [`descent_direction_check`] works on
//! [`LinearProblemSpec`] instances.

mod bounds;
pub mod suites;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problems::{dot, LinearProblem, LinearProblemSpec, Problem};
use crate::solvers::{scbgd_step, BlockSelection};

pub use bounds::{pl_rate_bound, rate_bounds, RateBounds, RateConstants};

/// Relative threshold below which a singular value counts as zero.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

/// Largest number of blocks any enumeration here will visit.
pub const MAX_ENUMERATED_BLOCKS: u64 = 1_000_000;

/// Smallest nonzero and largest singular value of `a`.
pub fn sigma_bounds(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem("matrix has non-finite entries".into()));
    }
    let sv = a.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::NoNonzeroSingularValue);
    }
    let min = sv
        .iter()
        .copied()
        .filter(|&s| s > SINGULAR_CUTOFF * max)
        .fold(f64::INFINITY, f64::min);
    Ok((min, max))
}

/// `C(n, k)` as `u64`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic `q`-subsets of `0..n`.
pub fn combinations(n: usize, q: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (q <= n && q > 0).then(|| (0..q).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut c = current.clone();
        let mut i = q;
        while i > 0 {
            i -= 1;
            if c[i] < n - q + i {
                c[i] += 1;
                for j in i + 1..q {
                    c[j] = c[j - 1] + 1;
                }
                next = Some(c);
                break;
            }
        }
        Some(current)
    })
}

fn guard_enumeration(n: usize, q: usize) -> Result<u64> {
    if q == 0 || q > n {
        return Err(Error::InvalidConfig(format!("block size q = {q} must lie in 1..={n}")));
    }
    let tau = binomial(n, q);
    if tau > MAX_ENUMERATED_BLOCKS {
        return Err(Error::TooManyBlocks {
            n,
            q,
            limit: MAX_ENUMERATED_BLOCKS,
        });
    }
    Ok(tau)
}

fn column_block(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |r, k| a[(r, cols[k])])
}

/// Block Lipschitz constants of `g(x) = ½||Ax - b||²`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLipschitz {
    /// `(block, L_i)` in lexicographic block order.
    pub blocks: Vec<(Vec<usize>, f64)>,
    pub l_max: f64,
}

/// `L_i = σ_max(A_{:,J_i})²` for every `q`-subset `J_i`.
pub fn block_lipschitz_constants(linear: &LinearProblemSpec, q: usize) -> Result<BlockLipschitz> {
    guard_enumeration(linear.n(), q)?;
    let blocks: Vec<(Vec<usize>, f64)> = combinations(linear.n(), q)
        .map(|cols| {
            let smax = column_block(&linear.a, &cols)
                .singular_values()
                .iter()
                .copied()
                .fold(0.0, f64::max);
            (cols, smax * smax)
        })
        .collect();
    let l_max = blocks.iter().map(|(_, l)| *l).fold(0.0, f64::max);
    Ok(BlockLipschitz { blocks, l_max })
}

/// Result of [`descent_direction_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentCheck {
    /// `d^T ∇g(x)` with `∇g = J(x)^T f(x)` formed from the full Jacobian.
    pub inner: f64,
    /// `-η ||p_raw||²`.
    pub identity: f64,
    pub p_norm: f64,
    pub degenerate: bool,
}

impl DescentCheck {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.inner.abs().max(self.identity.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.inner - self.identity).abs() / scale
        }
    }
}

/// Inner product of the block step direction with the full gradient of
/// `g = ½||f||²`.
pub fn descent_direction_check<P: Problem + ?Sized>(
    problem: &P,
    x: &[f64],
    block: &BlockSelection,
    delta: f64,
) -> Result<DescentCheck> {
    let step = scbgd_step(problem, x, block, delta)?;
    let f = DVector::from_vec(problem.residual(x));
    let grad = problem.dense_jacobian(x).transpose() * f;
    let p2 = dot(&step.p_raw, &step.p_raw);
    Ok(DescentCheck {
        inner: dot(&step.direction, grad.as_slice()),
        identity: -step.eta * p2,
        p_norm: p2.sqrt(),
        degenerate: step.degenerate,
    })
}

/// Exact conditional expectation of one step against its lower-bound
/// guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedDecrease {
    /// `g(x) = ½||f(x)||²`.
    pub g: f64,
    /// `||∇g(x)||²`.
    pub grad_norm2: f64,
    /// Average of `g(x_{k+1})` over all `C(n,q)` blocks.
    pub expectation: f64,
    /// `g(x) - α ||∇g(x)||²`.
    pub bound: f64,
    pub constants: RateConstants,
}

impl ExpectedDecrease {
    pub fn holds(&self) -> bool {
        self.expectation <= self.bound
    }
}

/// Constants of a linear instance for block size `q` and relaxation `delta`.
///
/// `σ̲, σ̄` come from `A`, `L_max` from the block enumeration, and
/// `γ = μ = σ_min(A)²`. `R_0` is left at zero; set it with
/// [`RateConstants::with_r0`].
pub fn linear_constants(linear: &LinearProblemSpec, q: usize, delta: f64) -> Result<RateConstants> {
    let (smin, smax) = sigma_bounds(&linear.a)?;
    let lip = block_lipschitz_constants(linear, q)?;
    let tau = binomial(linear.n(), q) as f64;
    let c = RateConstants::new(smin, smax, lip.l_max, 0.0, tau, delta)?;
    Ok(c.with_gamma(smin * smin).with_mu(smin * smin))
}

/// Enumerates every block, applies one step from `x` for each and averages
/// `g(x_{k+1})` with weight `1/τ`, in lexicographic block order.
pub fn expected_decrease_check(
    linear: &LinearProblemSpec,
    x: &[f64],
    q: usize,
    delta: f64,
) -> Result<ExpectedDecrease> {
    let tau = guard_enumeration(linear.n(), q)?;
    let constants = linear_constants(linear, q, delta).map_err(|e| match e {
        Error::InvalidConstants(msg) => Error::InvalidConfig(msg),
        other => other,
    })?;
    let problem = LinearProblem::new("linear", linear.clone())?;
    let f = problem.residual(x);
    let g = 0.5 * dot(&f, &f);
    let grad = linear.a.transpose() * DVector::from_column_slice(&f);
    let grad_norm2 = grad.norm_squared();

    let n = linear.n();
    let mut sum = 0.0;
    for cols in combinations(n, q) {
        let block = BlockSelection::new(cols, n)?;
        let step = scbgd_step(&problem, x, &block, delta)?;
        let fr = problem.residual(&step.next);
        sum += 0.5 * dot(&fr, &fr);
    }
    let expectation = sum / tau as f64;
    let bound = g - constants.alpha() * grad_norm2;
    Ok(ExpectedDecrease {
        g,
        grad_norm2,
        expectation,
        bound,
        constants,
    })
}

/// Least-squares solution of `A x = b` and its objective `½||Ax* - b||²`.
pub fn least_squares_solution(linear: &LinearProblemSpec) -> Result<(DVector<f64>, f64)> {
    let svd = linear.a.clone().svd(true, true);
    let x = svd
        .solve(&linear.b, SINGULAR_CUTOFF)
        .map_err(|e| Error::NumericalInconsistency(e.to_string()))?;
    let r = &linear.a * &x - &linear.b;
    Ok((x, 0.5 * r.norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::BroydenTridiagonal;

    fn diag(values: &[f64]) -> LinearProblemSpec {
        LinearProblemSpec::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(values)),
            DVector::zeros(values.len()),
        )
        .unwrap()
    }

    /// Jacobi eigenvalue iteration for symmetric matrices.
    fn jacobi_eigenvalues(mut s: DMatrix<f64>) -> Vec<f64> {
        let n = s.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| s[(i, j)] * s[(i, j)])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if s[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (s[(q, q)] - s[(p, p)]) / (2.0 * s[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let (skp, skq) = (s[(k, p)], s[(k, q)]);
                        s[(k, p)] = c * skp - sn * skq;
                        s[(k, q)] = sn * skp + c * skq;
                    }
                    for k in 0..n {
                        let (spk, sqk) = (s[(p, k)], s[(q, k)]);
                        s[(p, k)] = c * spk - sn * sqk;
                        s[(q, k)] = sn * spk + c * sqk;
                    }
                }
            }
        }
        (0..n).map(|i| s[(i, i)]).collect()
    }

    #[test]
    fn sigma_simple() {
        assert_eq!(sigma_bounds(&DMatrix::identity(3, 3)).unwrap(), (1.0, 1.0));
        let (lo, hi) = sigma_bounds(&diag(&[1.0, 2.0]).a).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!(matches!(
            sigma_bounds(&DMatrix::zeros(2, 2)),
            Err(Error::NoNonzeroSingularValue)
        ));
    }

    #[test]
    fn sigma_ignores_zero_singular_values() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (lo, hi) = sigma_bounds(&a).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_min_matches_eigen_oracle() {
        let a = DMatrix::from_fn(6, 4, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 1.5 + if i == j { 3.0 } else { 0.0 }
        });
        let eig = jacobi_eigenvalues(a.transpose() * &a);
        let lam_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let (lo, _) = sigma_bounds(&a).unwrap();
        assert!((lo - lam_min.sqrt()).abs() <= 1e-10 * lo);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(200, 100), u64::MAX);
        assert_eq!(combinations(4, 2).count(), 6);
        assert_eq!(combinations(5, 5).collect::<Vec<_>>(), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(combinations(3, 1).collect::<Vec<_>>(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn lipschitz_examples() {
        let lip = block_lipschitz_constants(&diag(&[1.0, 1.0, 1.0]), 2).unwrap();
        assert!(lip.blocks.iter().all(|(_, l)| (l - 1.0).abs() < 1e-14));
        let lip = block_lipschitz_constants(&diag(&[1.0, 2.0, 3.0]), 1).unwrap();
        let ls: Vec<f64> = lip.blocks.iter().map(|(_, l)| *l).collect();
        for (l, e) in ls.iter().zip([1.0, 4.0, 9.0]) {
            assert!((l - e).abs() < 1e-12);
        }
        assert!((lip.l_max - 9.0).abs() < 1e-12);
        let lip = block_lipschitz_constants(&diag(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert!((lip.l_max - 9.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_guard() {
        let spec = diag(&[1.0; 40]);
        assert!(matches!(
            block_lipschitz_constants(&spec, 20),
            Err(Error::TooManyBlocks { .. })
        ));
    }

    #[test]
    fn descent_at_root_is_zero() {
        let p = LinearProblem::identity(4, 1.0).unwrap();
        let c = descent_direction_check(&p, &[1.0; 4], &BlockSelection::new(vec![1], 4).unwrap(), 1.0).unwrap();
        assert_eq!(c.inner, 0.0);
        assert!(c.degenerate);
    }

    #[test]
    fn descent_identity_single_column() {
        let p = LinearProblem::identity(4, 0.5).unwrap();
        let x = [2.0, -1.0, 3.0, 0.0];
        let c = descent_direction_check(&p, &x, &BlockSelection::new(vec![2], 4).unwrap(), 1.0).unwrap();
        assert_eq!(c.inner, -(2.5f64 * 2.5));
    }

    #[test]
    fn descent_broyden_negative() {
        let p = BroydenTridiagonal::new(12).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let block = BlockSelection::new(vec![0, 4, 5, 9, 11], 12).unwrap();
        let c = descent_direction_check(&p, &x, &block, 1.0).unwrap();
        assert!(c.inner < 0.0);
        assert!(c.relative_gap() <= 1e-12);
    }

    #[test]
    fn identity_expectation_closed_form() {
        // Block {1} zeroes g, every other block leaves it: E = (1 - 1/n) / 2.
        // The bound is 1/2 - (1/n)(2 - 1/2) = 1/2 - 1.5/n, which E exceeds.
        for n in [2usize, 4, 7] {
            let spec = LinearProblemSpec::new(DMatrix::identity(n, n), DVector::zeros(n)).unwrap();
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            let e = expected_decrease_check(&spec, &x, 1, 1.0).unwrap();
            let nf = n as f64;
            assert!((e.expectation - 0.5 * (1.0 - 1.0 / nf)).abs() < 1e-15);
            assert!((e.bound - (0.5 - 1.5 / nf)).abs() < 1e-15);
            assert!(!e.holds());
        }
    }

    #[test]
    fn stationary_point_expectation() {
        let spec = LinearProblemSpec::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, -0.1, 1.5]),
            DVector::from_vec(vec![1.0, -2.0]),
        )
        .unwrap();
        let (xs, gs) = least_squares_solution(&spec).unwrap();
        let e = expected_decrease_check(&spec, xs.as_slice(), 1, 1.0).unwrap();
        assert!(e.grad_norm2 < 1e-28);
        assert!((e.expectation - e.g).abs() < 1e-28);
        assert!((e.bound - e.g).abs() < 1e-28);
        assert!(gs < 1e-28);
    }

    #[test]
    fn expectation_rejects_out_of_range_delta() {
        // κ² = 9 needs δ < 4/9.
        let spec = diag(&[1.0, 3.0, 2.0]);
        assert!(matches!(
            expected_decrease_check(&spec, &[1.0, 1.0, 1.0], 1, 1.0),
            Err(Error::InvalidConfig(_))
        ));
    }
}
