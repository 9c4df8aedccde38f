use super::Problem;
use crate::error::{Error, Result};

/// Central-difference step used by the Jacobian checks.
pub const FD_STEP: f64 = 1e-6;

/// `(f(x + h e_j) - f(x - h e_j)) / (2h)`.
pub fn finite_difference_column<P: Problem + ?Sized>(problem: &P, x: &[f64], j: usize, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    if j >= problem.n() {
        return Err(Error::InvalidBlock(format!(
            "column index {} outside 1..={}",
            j + 1,
            problem.n()
        )));
    }
    let mut xp = x.to_vec();
    xp[j] = x[j] + h;
    let fp = problem.residual(&xp);
    xp[j] = x[j] - h;
    let fm = problem.residual(&xp);
    if fp.iter().chain(&fm).any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("residual at x ± h·e_{}", j + 1)));
    }
    Ok(fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * h)).collect())
}
