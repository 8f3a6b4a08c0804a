//! Augmented Dickey-Fuller unit-root test with a constant and no trend.
//!
//! Regression: `dy(t) = a + rho y(t-1) + sum_{i=1..k} phi_i dy(t-i) + e(t)` with
//! `k = floor((n - 1)^(1/3))`. The statistic is the t-ratio of `rho`; its
//! p-value is interpolated between finite-sample critical values.

use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::ReturnMatrix;
use crate::error::{Error, Result};

pub const ADF_MIN_LENGTH: usize = 25;

const PVALUE_FLOOR: f64 = 0.001;
const PVALUE_CEIL: f64 = 0.999;

/// Response-surface coefficients `b0 + b1/T + b2/T^2 + b3/T^3` for the
/// constant-only case at 1%, 5% and 10%.
const SURFACE: [(f64, [f64; 4]); 3] = [
    (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AdfResult {
    pub statistic: f64,
    pub pvalue: f64,
    pub lags: usize,
    /// Observations in the regression.
    pub nobs: usize,
    pub level: f64,
    /// Unit root rejected: `pvalue < level`.
    pub reject: bool,
}

/// `(level, critical value)` at 1%, 5% and 10% for `nobs` regression rows.
pub fn adf_critical_values(nobs: usize) -> [(f64, f64); 3] {
    let t = nobs as f64;
    SURFACE.map(|(level, b)| (level, b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t)))
}

fn interpolate_pvalue(stat: f64, crit: &[(f64, f64); 3]) -> f64 {
    // Points (critical value, level) with critical values increasing.
    let seg = |i: usize| {
        let (p0, c0) = crit[i];
        let (p1, c1) = crit[i + 1];
        p0 + (stat - c0) * (p1 - p0) / (c1 - c0)
    };
    let p = if stat <= crit[1].1 { seg(0) } else { seg(1) };
    p.clamp(PVALUE_FLOOR, PVALUE_CEIL)
}

pub fn adf_test(series: &[f64], level: f64) -> Result<AdfResult> {
    let n = series.len();
    if n < ADF_MIN_LENGTH {
        return Err(Error::SeriesTooShort { need: ADF_MIN_LENGTH, got: n });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("level must lie in (0, 1), got {level}")));
    }
    if let Some(row) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row, column: 0 });
    }
    if series.iter().all(|&v| v == series[0]) {
        return Err(Error::ConstantSeries);
    }
    let lags = ((n - 1) as f64).cbrt().floor() as usize;
    let diff: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    // Rows t = lags .. diff.len(): response diff[t], regressors y[t], diff[t-1..t-lags].
    let nobs = diff.len() - lags;
    let k = 2 + lags;
    let x = DMatrix::from_fn(nobs, k, |r, c| {
        let t = r + lags;
        match c {
            0 => 1.0,
            1 => series[t],
            _ => diff[t - (c - 1)],
        }
    });
    let y = DVector::from_fn(nobs, |r, _| diff[r + lags]);
    let xtx = x.transpose() * &x;
    let chol = xtx.cholesky().ok_or(Error::ConstantSeries)?;
    let beta = chol.solve(&(x.transpose() * &y));
    let resid = &y - &x * &beta;
    let s2 = resid.norm_squared() / (nobs - k) as f64;
    let var_rho = s2 * chol.inverse()[(1, 1)];
    if !(var_rho > 0.0) || !var_rho.is_finite() {
        return Err(Error::ConstantSeries);
    }
    let statistic = beta[1] / var_rho.sqrt();
    let pvalue = interpolate_pvalue(statistic, &adf_critical_values(nobs));
    Ok(AdfResult { statistic, pvalue, lags, nobs, level, reject: pvalue < level })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StationarityReport {
    pub assets: Vec<String>,
    pub results: Vec<AdfResult>,
    pub level: f64,
}

impl StationarityReport {
    pub fn all_stationary(&self) -> bool {
        self.results.iter().all(|r| r.reject)
    }
}

pub fn stationarity_report(returns: &ReturnMatrix, level: f64) -> Result<StationarityReport> {
    let results = returns
        .values
        .column_iter()
        .map(|c| {
            let col: Vec<f64> = c.iter().copied().collect();
            adf_test(&col, level)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StationarityReport { assets: returns.assets.clone(), results, level })
}
