//! Named verification suites shared by the command line and the tests.
//!
//! Each suite returns one [`CheckLine`] per check.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_core::SeedableRng;
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{
    binomial, combinations, descent_direction_check, expected_decrease_check, least_squares_solution, linear_constants,
    pl_rate_bound, rate_bounds, sigma_bounds,
};
use crate::error::{Error, Result};
use crate::problems::{
    finite_difference_column, BroydenTridiagonal, LiTridiagonal, LinearProblem, LinearProblemSpec, Problem, FD_STEP,
};
use crate::solvers::{scbgd_step, BlockSampler};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub instance: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckLine {
    fn new(name: &str, instance: impl Into<String>, measured: f64, bound: f64, pass: bool) -> Self {
        CheckLine {
            name: name.to_string(),
            instance: instance.into(),
            measured,
            bound,
            pass,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {:<40} measured={:<14.6e} bound={:<14.6e} {}",
            self.name,
            self.instance,
            self.measured,
            self.bound,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Descent,
    Expectation,
    Bounds,
    Jacobian,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Descent, Suite::Expectation, Suite::Bounds, Suite::Jacobian];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Descent => "descent",
            Suite::Expectation => "expectation",
            Suite::Bounds => "bounds",
            Suite::Jacobian => "jacobian",
        }
    }

    pub fn run(&self, seed: u64) -> Result<Vec<CheckLine>> {
        match self {
            Suite::Descent => descent_suite(1000, 50, 5, seed),
            Suite::Expectation => expectation_suite(100, &[0.5, 1.0], seed),
            Suite::Bounds => bounds_suite(200, 500, seed),
            Suite::Jacobian => jacobian_suite(100, 20, seed),
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn uniform_point(rng: &mut Xoshiro256PlusPlus, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn benchmarks(n: usize) -> Result<Vec<Box<dyn Problem>>> {
    Ok(vec![
        Box::new(BroydenTridiagonal::new(n)?),
        Box::new(LiTridiagonal::new(n)?),
    ])
}

/// `I + scale·G` with standard normal `G`, and a standard normal `b`.
pub fn near_identity_system(n: usize, scale: f64, seed: u64) -> Result<LinearProblemSpec> {
    let mut r = rng(seed);
    let a = DMatrix::from_fn(n, n, |i, j| {
        let g: f64 = r.sample(StandardNormal);
        let e = if i == j { 1.0 } else { 0.0 };
        e + scale * g
    });
    let b = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
    LinearProblemSpec::new(a, b)
}

/// The linear instance used by the expectation and bounds suites.
pub fn reference_linear_system(seed: u64) -> Result<LinearProblemSpec> {
    near_identity_system(8, 0.05, seed)
}

/// Analytic Jacobian columns against central differences, plus row-support
/// coverage, at `points` random points in `[-2, 2]^n`.
pub fn jacobian_suite(points: usize, n: usize, seed: u64) -> Result<Vec<CheckLine>> {
    let mut r = rng(seed);
    let mut lines = Vec::new();
    for problem in benchmarks(n)? {
        let mut worst = 0.0f64;
        let mut uncovered = 0usize;
        let cols: Vec<usize> = (0..n).collect();
        for _ in 0..points {
            let x = uniform_point(&mut r, n, -2.0, 2.0);
            let block = problem.jacobian_columns(&x, &cols)?;
            for j in 0..n {
                let analytic = block.column(j);
                let fd = finite_difference_column(problem.as_ref(), &x, j, FD_STEP)?;
                let diff = analytic
                    .iter()
                    .zip(&fd)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
                worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
                let support = problem.row_support(j).unwrap_or_default();
                uncovered += fd
                    .iter()
                    .enumerate()
                    .filter(|(row, v)| v.abs() > 1e-8 && !support.contains(row))
                    .count();
            }
        }
        let instance = format!("{} n={n} points={points}", problem.name());
        lines.push(CheckLine::new(
            "jacobian-fd",
            instance.clone(),
            worst,
            1e-5,
            worst <= 1e-5,
        ));
        lines.push(CheckLine::new(
            "row-support",
            instance,
            uncovered as f64,
            0.0,
            uncovered == 0,
        ));
    }
    Ok(lines)
}

/// Block step directions against the full gradient at random states.
pub fn descent_suite(draws: usize, n: usize, q: usize, seed: u64) -> Result<Vec<CheckLine>> {
    let mut r = rng(seed);
    let mut lines = Vec::new();
    for problem in benchmarks(n)? {
        let mut sampler = BlockSampler::new(n, q, seed ^ 0x5eed)?;
        let mut max_inner = f64::NEG_INFINITY;
        let mut max_gap = 0.0f64;
        let mut checked = 0usize;
        let mut negative = 0usize;
        for _ in 0..draws {
            let x = uniform_point(&mut r, n, -2.0, 2.0);
            let block = sampler.sample();
            let c = descent_direction_check(problem.as_ref(), &x, &block, 1.0)?;
            if c.p_norm <= 1e-8 {
                continue;
            }
            checked += 1;
            if c.inner < 0.0 {
                negative += 1;
            }
            max_inner = max_inner.max(c.inner);
            max_gap = max_gap.max(c.relative_gap());
        }
        let instance = format!("{} n={n} q={q} {negative}/{checked}", problem.name());
        lines.push(CheckLine::new(
            "descent-inner-product",
            instance.clone(),
            max_inner,
            0.0,
            checked > 0 && negative == checked,
        ));
        lines.push(CheckLine::new(
            "descent-identity",
            instance,
            max_gap,
            1e-12,
            max_gap <= 1e-12,
        ));
    }
    Ok(lines)
}

/// Exhaustive-enumeration expectation against `g - α||∇g||²`.
pub fn expectation_suite(iterates: usize, deltas: &[f64], seed: u64) -> Result<Vec<CheckLine>> {
    let spec = reference_linear_system(seed)?;
    let q = 2;
    let mut r = rng(seed.wrapping_add(1));
    let xs: Vec<Vec<f64>> = (0..iterates)
        .map(|_| (0..spec.n()).map(|_| r.sample(StandardNormal)).collect())
        .collect();
    let mut lines = Vec::new();
    for &delta in deltas {
        let mut worst = f64::NEG_INFINITY;
        let mut held = 0usize;
        for x in &xs {
            let e = expected_decrease_check(&spec, x, q, delta)?;
            // Positive means the bound was violated.
            worst = worst.max((e.expectation - e.bound) / e.g.max(f64::MIN_POSITIVE));
            if e.holds() {
                held += 1;
            }
        }
        let instance = format!(
            "8x8 q={q} tau={} delta={delta} {held}/{iterates}",
            binomial(spec.n(), q)
        );
        lines.push(CheckLine::new(
            "expected-decrease",
            instance,
            worst,
            0.0,
            held == iterates,
        ));
    }
    Ok(lines)
}

/// Rate-bound algebra, singular-value bracketing, and Monte-Carlo
/// trajectories against the linear-rate bound.
pub fn bounds_suite(runs: usize, steps: usize, seed: u64) -> Result<Vec<CheckLine>> {
    let spec = reference_linear_system(seed)?;
    let (n, q, delta) = (spec.n(), 2usize, 1.0);
    let mut lines = Vec::new();

    // Sub-blocks of A have singular values inside [σ_min(A), σ_max(A)].
    let (smin, smax) = sigma_bounds(&spec.a)?;
    let mut worst_bracket = 0.0f64;
    for cols in combinations(n, q) {
        let sub = DMatrix::from_fn(n, q, |i, k| spec.a[(i, cols[k])]);
        let (lo, hi) = sigma_bounds(&sub)?;
        worst_bracket = worst_bracket.max((hi - smax) / smax).max((smin - lo) / smin);
    }
    lines.push(CheckLine::new(
        "sigma-bracket",
        format!("8x8 all q={q} blocks"),
        worst_bracket,
        1e-12,
        worst_bracket <= 1e-12,
    ));

    // Monte-Carlo trajectories.
    let (x_star, g_star) = least_squares_solution(&spec)?;
    let problem = LinearProblem::new("linear", spec.clone())?;
    let x0 = vec![0.0; n];
    let mut mean_gap = vec![0.0; steps + 1];
    let mut r0 = 0.0f64;
    for run in 0..runs {
        let mut sampler = BlockSampler::new(n, q, seed.wrapping_add(run as u64))?;
        let mut x = x0.clone();
        for slot in mean_gap.iter_mut() {
            let f = problem.residual(&x);
            *slot += (0.5 * f.iter().map(|v| v * v).sum::<f64>() - g_star) / runs as f64;
            let dist = x
                .iter()
                .zip(x_star.iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            r0 = r0.max(dist);
            x = scbgd_step(&problem, &x, &sampler.sample(), delta)?.next;
        }
    }
    let constants = linear_constants(&spec, q, delta)?.with_r0(r0);
    let psi0 = mean_gap[0];

    let mut worst_linear = 0.0f64;
    let mut worst_sublinear = 0.0f64;
    let mut consistency = 0.0f64;
    for (k, &gap) in mean_gap.iter().enumerate().skip(1) {
        let b = rate_bounds(&constants, k as u64, psi0)?;
        worst_linear = worst_linear.max(gap / b.linear.expect("gamma set"));
        worst_sublinear = worst_sublinear.max(gap / b.sublinear);
        consistency = consistency.max((b.sublinear - b.sublinear_via_alpha).abs() / b.sublinear);
    }
    let instance = format!("8x8 q={q} delta={delta} runs={runs} k<={steps}");
    lines.push(CheckLine::new(
        "rate-bound-consistency",
        instance.clone(),
        consistency,
        1e-12,
        consistency <= 1e-12,
    ));
    lines.push(CheckLine::new(
        "trajectory-vs-linear",
        instance.clone(),
        worst_linear,
        1.0,
        worst_linear <= 1.0,
    ));
    lines.push(CheckLine::new(
        "trajectory-vs-sublinear",
        format!("{instance} R0={r0:.4}"),
        worst_sublinear,
        1.0,
        worst_sublinear <= 1.0,
    ));
    let side = constants.strong_convexity_side_condition().unwrap_or(false);
    lines.push(CheckLine::new(
        "side-condition",
        format!("gamma={:.4}", smin * smin),
        if side { 1.0 } else { 0.0 },
        1.0,
        true,
    ));

    let pl: Vec<f64> = (1..=steps as u64)
        .map(|k| pl_rate_bound(&constants, k, psi0))
        .collect::<Result<_>>()?;
    let monotone = pl.windows(2).all(|w| w[1] <= w[0]);
    lines.push(CheckLine::new(
        "pl-monotone",
        format!("mu=sigma_min^2={:.4}", smin * smin),
        pl[pl.len() - 1],
        psi0,
        monotone && pl[pl.len() - 1] <= psi0,
    ));
    Ok(lines)
}
