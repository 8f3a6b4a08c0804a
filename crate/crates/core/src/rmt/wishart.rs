//! Largest-eigenvalue test for white Wishart matrices.
//!
//! For `X` an `n x p` matrix of independent standard normals, the largest
//! eigenvalue `l` of `X^T X` satisfies `(l - mu) / sigma -> F1` with
//!
//! ```text
//! mu    = (sqrt(n - 1/2) + sqrt(p - 1/2))^2
//! sigma = (sqrt(n - 1/2) + sqrt(p - 1/2)) (1/sqrt(n - 1/2) + 1/sqrt(p - 1/2))^(1/3)
//! ```
//!
//! The half-integer shifts make the approximation accurate down to `n, p ~ 5`.

use crate::error::{Error, Result};
use crate::rmt::tracy_widom::{Beta, TracyWidomTable};
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

/// Centering and scaling `(mu, sigma)` for the largest eigenvalue of `W_p(n, I)`.
pub fn wishart_edge_scaling(n: usize, p: usize) -> (f64, f64) {
    let a = (n as f64 - 0.5).sqrt();
    let b = (p as f64 - 0.5).sqrt();
    let mu = (a + b) * (a + b);
    let sigma = (a + b) * (1.0 / a + 1.0 / b).cbrt();
    (mu, sigma)
}

/// Standardized statistic for `lambda1`, the largest eigenvalue of the sample
/// covariance `X^T X / n`.
pub fn wishart_statistic(n: usize, p: usize, lambda1: f64) -> f64 {
    let (mu, sigma) = wishart_edge_scaling(n, p);
    (n as f64 * lambda1 - mu) / sigma
}

/// Upper-tail p-value `1 - F1(s)`. `table` must be the orthogonal (`Beta::One`) law.
pub fn wishart_largest_eig_pvalue(table: &TracyWidomTable, n: usize, p: usize, lambda1: f64) -> Result<f64> {
    if n < 2 || p < 2 {
        return Err(Error::InvalidParameter(alloc::format!("need n, p >= 2, got n={n}, p={p}")));
    }
    if !(lambda1 > 0.0) || !lambda1.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("largest eigenvalue must be positive, got {lambda1}")));
    }
    if table.beta() != Beta::One {
        return Err(Error::InvalidParameter("real Wishart test needs the beta = 1 table".into()));
    }
    Ok(table.sf(wishart_statistic(n, p, lambda1)))
}
