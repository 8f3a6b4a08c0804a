//! Tracy-Widom approximation to the greatest root distribution `theta(p, m, n)`.
//!
//! `theta` is the largest eigenvalue of `(A + B)^{-1} B` with independent
//! `A ~ W_p(m, I)`, `B ~ W_p(n, I)`, `m >= p`. Its logit, centered by `mu` and
//! scaled by `sigma`, is approximately `F1`:
//!
//! ```text
//! sin^2(gamma/2) = (min(p, n) - 1/2) / (m + n - 1)
//! sin^2(phi/2)   = (max(p, n) - 1/2) / (m + n - 1)
//! mu             = 2 log tan((phi + gamma) / 2)
//! sigma^3        = 16 / (m + n - 1)^2 / (sin^2(phi + gamma) sin(phi) sin(gamma))
//! ```

#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmt::tracy_widom::{Beta, TracyWidomTable};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GreatestRootParams {
    /// Dimensions after the duality map, if it was applied.
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub gamma: f64,
    pub phi: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Whether `(p, m, n)` was replaced by `(n, m + n - p, p)` because `n < p`.
    pub dual_applied: bool,
}

/// Centering and scaling for `theta(p, m, n)`.
///
/// When `n < p` the equivalent `theta(n, m + n - p, p)` is used; the angles
/// depend only on `min(p, n)`, `max(p, n)` and `m + n - 1`, so the result is the
/// same either way and the flag is informational.
pub fn greatest_root_params(p: usize, m: usize, n: usize) -> Result<GreatestRootParams> {
    if p == 0 || n == 0 {
        return Err(Error::InvalidParameter(alloc::format!("need p, n >= 1, got p={p}, n={n}")));
    }
    if m < p {
        return Err(Error::InvalidParameter(alloc::format!(
            "greatest root needs m >= p (got p={p}, m={m}); the duality map preserves m - p"
        )));
    }
    let (p, m, n, dual_applied) = if n < p { (n, m + n - p, p, true) } else { (p, m, n, false) };
    let total = (m + n - 1) as f64;
    let lo = (p.min(n) as f64 - 0.5) / total;
    let hi = (p.max(n) as f64 - 0.5) / total;
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::OutOfDomain(alloc::format!(
            "angle arguments ({lo}, {hi}) outside (0, 1) for p={p}, m={m}, n={n}"
        )));
    }
    let gamma = 2.0 * lo.sqrt().asin();
    let phi = 2.0 * hi.sqrt().asin();
    let tan_half = ((phi + gamma) / 2.0).tan();
    if !(tan_half > 0.0) || !tan_half.is_finite() {
        return Err(Error::OutOfDomain(alloc::format!("angles sum to {} >= pi for p={p}, m={m}, n={n}", phi + gamma)));
    }
    let mu = 2.0 * tan_half.ln();
    let s = (phi + gamma).sin();
    let sigma3 = 16.0 / (total * total) / (s * s * phi.sin() * gamma.sin());
    Ok(GreatestRootParams { p, m, n, gamma, phi, mu, sigma: sigma3.cbrt(), dual_applied })
}

pub fn logit(theta: f64) -> f64 {
    (theta / (1.0 - theta)).ln()
}

/// Standardized logit statistic `(logit(theta) - mu) / sigma`.
pub fn greatest_root_statistic(params: &GreatestRootParams, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::OutOfDomain(alloc::format!("theta must lie in (0, 1), got {theta}")));
    }
    Ok((logit(theta) - params.mu) / params.sigma)
}

/// Upper-tail p-value `1 - F1((logit(theta) - mu) / sigma)`.
pub fn greatest_root_pvalue(table: &TracyWidomTable, params: &GreatestRootParams, theta: f64) -> Result<f64> {
    if table.beta() != Beta::One {
        return Err(Error::InvalidParameter("greatest root test needs the beta = 1 table".into()));
    }
    Ok(table.sf(greatest_root_statistic(params, theta)?))
}
