//! Sequential greatest-root testing of squared canonical correlations.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::cca::CcaSolution;
use crate::error::{Error, Result};
use crate::rmt::greatest_root::{greatest_root_params, greatest_root_pvalue, logit, GreatestRootParams};
use crate::rmt::tracy_widom::TracyWidomTable;

/// Keeps `theta` strictly inside (0, 1) so the logit stays finite.
const THETA_CLAMP: f64 = 1e-15;

/// Null distribution used for the j-th root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Deflation {
    /// `theta(p - j + 1, n - q - 1, q - j + 1)`: remove the factors already accepted.
    #[default]
    On,
    /// `theta(p, n - q - 1, q)` for every root.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FactorRow {
    /// 1-based factor index.
    pub j: usize,
    pub r2: f64,
    pub logit: f64,
    pub params: GreatestRootParams,
    pub pvalue: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FactorCountReport {
    pub rows: Vec<FactorRow>,
    /// Number of leading roots whose null was rejected.
    pub retained: usize,
    pub alpha: f64,
    pub deflation: Deflation,
}

/// Count significant canonical factors for `p` responses, `q` predictors and `n` samples.
pub fn count_factors(
    table: &TracyWidomTable,
    sol: &CcaSolution,
    p: usize,
    q: usize,
    n: usize,
    alpha: f64,
    deflation: Deflation,
) -> Result<FactorCountReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if p == 0 || q == 0 || n <= p + q + 1 {
        return Err(Error::InvalidParameter(alloc::format!("need p, q >= 1 and n > p + q + 1 (p={p}, q={q}, n={n})")));
    }
    if sol.r2.len() > p.min(q) {
        return Err(Error::Dimension(alloc::format!("{} correlations for p={p}, q={q}", sol.r2.len())));
    }
    let m = n - q - 1;
    let mut rows = Vec::with_capacity(sol.r2.len());
    let mut retained = 0;
    let mut prefix = true;
    for (idx, &r2) in sol.r2.iter().enumerate() {
        let j = idx + 1;
        let params = match deflation {
            Deflation::On => greatest_root_params(p - j + 1, m, q - j + 1)?,
            Deflation::Off => greatest_root_params(p, m, q)?,
        };
        let theta = r2.clamp(THETA_CLAMP, 1.0 - THETA_CLAMP);
        let pvalue = greatest_root_pvalue(table, &params, theta)?;
        let rejected = pvalue < alpha;
        prefix &= rejected;
        if prefix {
            retained = j;
        }
        rows.push(FactorRow { j, r2, logit: logit(theta), params, pvalue, rejected });
    }
    Ok(FactorCountReport { rows, retained, alpha, deflation })
}
