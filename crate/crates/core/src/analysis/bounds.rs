use crate::error::{Error, Result};

/// Constants entering the rate bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConstants {
    /// Lower bound on the smallest nonzero Jacobian singular value.
    pub sigma_min_lb: f64,
    /// Upper bound on the largest Jacobian singular value.
    pub sigma_max_ub: f64,
    /// Largest block Lipschitz constant.
    pub l_max: f64,
    /// Level-set radius (a distance, not its square).
    pub r0: f64,
    /// Strong-convexity modulus.
    pub gamma: Option<f64>,
    /// Polyak-Łojasiewicz constant.
    pub mu: Option<f64>,
    /// Number of blocks, `C(n, q)`. Kept as `f64` since it overflows fast.
    pub tau: f64,
    pub delta: f64,
    alpha: f64,
}

impl RateConstants {
    /// Fails unless `0 < σ̲ <= σ̄ < ∞`, `τ >= 1` and
    /// `0 < δ < min(2, 4σ̲²/L_max)`.
    pub fn new(sigma_min_lb: f64, sigma_max_ub: f64, l_max: f64, r0: f64, tau: f64, delta: f64) -> Result<Self> {
        if !(sigma_min_lb > 0.0 && sigma_min_lb <= sigma_max_ub && sigma_max_ub.is_finite()) {
            return Err(Error::InvalidConstants(format!(
                "need 0 < sigma_min ({sigma_min_lb}) <= sigma_max ({sigma_max_ub}) < inf"
            )));
        }
        if !(l_max > 0.0 && l_max.is_finite() && tau >= 1.0 && r0 >= 0.0) {
            return Err(Error::InvalidConstants(format!(
                "need L_max > 0, tau >= 1, R0 >= 0 (got {l_max}, {tau}, {r0})"
            )));
        }
        let limit = 2.0f64.min(4.0 * sigma_min_lb * sigma_min_lb / l_max);
        if !(delta > 0.0 && delta < limit) {
            return Err(Error::InvalidConstants(format!("delta = {delta} outside (0, {limit})")));
        }
        let alpha =
            delta / (tau * sigma_max_ub * sigma_max_ub) * (2.0 - delta * l_max / (2.0 * sigma_min_lb * sigma_min_lb));
        if alpha <= 0.0 {
            return Err(Error::InvalidConstants(format!("alpha = {alpha} <= 0")));
        }
        Ok(RateConstants {
            sigma_min_lb,
            sigma_max_ub,
            l_max,
            r0,
            gamma: None,
            mu: None,
            tau,
            delta,
            alpha,
        })
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    /// `(δ / (τ σ̄²)) (2 - δ L_max / (2 σ̲²))`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `δ² L_max γ - 4 δ γ σ̲² + τ σ̄² σ̲² >= 0`, when `γ` is known.
    pub fn strong_convexity_side_condition(&self) -> Option<bool> {
        let g = self.gamma?;
        let s2 = self.sigma_min_lb * self.sigma_min_lb;
        let d = self.delta;
        Some(d * d * self.l_max * g - 4.0 * d * g * s2 + self.tau * self.sigma_max_ub.powi(2) * s2 >= 0.0)
    }

    fn contraction(&self, modulus: f64) -> f64 {
        1.0 - 2.0 * self.delta * modulus / (self.tau * self.sigma_max_ub.powi(2))
            * (2.0 - self.delta * self.l_max / (2.0 * self.sigma_min_lb.powi(2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    /// `2τσ̲²σ̄²R₀² / (kδ(4σ̲² - δL_max))`.
    pub sublinear: f64,
    /// `R₀² / (kα)`; equal to `sublinear` up to rounding.
    pub sublinear_via_alpha: f64,
    /// `(1 - 2γα)^k ψ₀`, when `γ` is known.
    pub linear: Option<f64>,
    pub side_condition: Option<bool>,
}

/// Expected-gap bounds after `k` iterations from initial gap `psi0`.
pub fn rate_bounds(c: &RateConstants, k: u64, psi0: f64) -> Result<RateBounds> {
    if c.alpha <= 0.0 {
        return Err(Error::InvalidConstants(format!("alpha = {} <= 0", c.alpha)));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let kf = k as f64;
    let s2 = c.sigma_min_lb * c.sigma_min_lb;
    let r2 = c.r0 * c.r0;
    let sublinear = 2.0 * c.tau * s2 * c.sigma_max_ub.powi(2) * r2 / (kf * c.delta * (4.0 * s2 - c.delta * c.l_max));
    let sublinear_via_alpha = r2 / (kf * c.alpha);
    let scale = sublinear.abs().max(sublinear_via_alpha.abs());
    if scale > 0.0 && (sublinear - sublinear_via_alpha).abs() > 1e-12 * scale {
        return Err(Error::NumericalInconsistency(format!(
            "sublinear bound {sublinear:e} disagrees with R0^2/(k alpha) = {sublinear_via_alpha:e}"
        )));
    }
    let linear = c.gamma.map(|g| c.contraction(g).powf(kf) * psi0);
    Ok(RateBounds {
        sublinear,
        sublinear_via_alpha,
        linear,
        side_condition: c.strong_convexity_side_condition(),
    })
}

/// `(1 - (2δμ/(τσ̄²))(2 - δL_max/(2σ̲²)))^k ψ₀`.
pub fn pl_rate_bound(c: &RateConstants, k: u64, psi0: f64) -> Result<f64> {
    let mu =
        c.mu.ok_or_else(|| Error::InvalidConstants("PL constant mu not set".into()))?;
    if mu <= 0.0 {
        return Err(Error::InvalidConstants(format!("mu = {mu} must be positive")));
    }
    if c.alpha <= 0.0 {
        return Err(Error::InvalidConstants(format!("alpha = {} <= 0", c.alpha)));
    }
    Ok(c.contraction(mu).powf(k as f64) * psi0)
}
