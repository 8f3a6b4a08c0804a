//! Canonical correlation analysis and the reduced-rank regression it induces
//! when the residual weight matrix is `S_YY^{-1}`.
//!
//! Conventions: `X` holds the `q` predictors, `Y` the `p` responses, both with
//! `n` rows. Covariance blocks use divisor `n - 1`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::linalg::{column_means, cross_covariance, sym_sqrt_and_inv_sqrt, symmetrize};
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedCovariance {
    /// `q x q`, ridge included.
    pub sxx: DMatrix<f64>,
    /// `p x p`, ridge included.
    pub syy: DMatrix<f64>,
    /// `q x p`.
    pub sxy: DMatrix<f64>,
    pub n: usize,
    pub ridge: f64,
    pub x_means: DVector<f64>,
    pub y_means: DVector<f64>,
    /// Set when `n` does not exceed a block dimension and no ridge was added,
    /// so at least one block is singular.
    pub singular_risk: bool,
}

impl PartitionedCovariance {
    pub fn q(&self) -> usize {
        self.sxx.nrows()
    }

    pub fn p(&self) -> usize {
        self.syy.nrows()
    }

    pub fn syx(&self) -> DMatrix<f64> {
        self.sxy.transpose()
    }
}

pub fn partitioned_covariance(x: &DMatrix<f64>, y: &DMatrix<f64>, ridge: f64) -> Result<PartitionedCovariance> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::Dimension(alloc::format!("X has {n} rows, Y has {}", y.nrows())));
    }
    if n < 2 {
        return Err(Error::SeriesTooShort { need: 2, got: n });
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::Dimension("empty predictor or response block".into()));
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("ridge must be nonnegative, got {ridge}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite entry in X or Y".into()));
    }
    let mut sxx = symmetrize(&cross_covariance(x, x));
    let mut syy = symmetrize(&cross_covariance(y, y));
    for i in 0..sxx.nrows() {
        sxx[(i, i)] += ridge;
    }
    for i in 0..syy.nrows() {
        syy[(i, i)] += ridge;
    }
    let singular_risk = ridge == 0.0 && (n <= x.ncols() || n <= y.ncols());
    if singular_risk {
        log::warn!(
            "n = {n} does not exceed block dimensions ({}, {}); covariance is singular without a ridge",
            x.ncols(),
            y.ncols()
        );
    }
    Ok(PartitionedCovariance {
        sxx,
        syy,
        sxy: cross_covariance(x, y),
        n,
        ridge,
        x_means: column_means(x),
        y_means: column_means(y),
        singular_risk,
    })
}

/// Canonical pairs, strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaSolution {
    /// Squared canonical correlations, non-increasing, in `[0, 1]`.
    pub r2: Vec<f64>,
    /// `p x k`; column `j` is `b_j` with `b_j^T S_YY b_j = 1`.
    pub response_weights: DMatrix<f64>,
    /// `q x k`; column `j` is `a_j` with `a_j^T S_XX a_j = 1`.
    pub predictor_weights: DMatrix<f64>,
}

impl CcaSolution {
    pub fn k(&self) -> usize {
        self.r2.len()
    }

    pub fn correlations(&self) -> Vec<f64> {
        self.r2.iter().map(|r| r.sqrt()).collect()
    }
}

/// Weight normalization applied by [`canonical_correlations`].
pub const WEIGHT_NORMALIZATION: &str = "unit sample variance; largest |response weight| positive";

/// Explained-variance convention used by [`explained_variance`].
pub const EXPLAINED_VARIANCE_CONVENTION: &str = "share of total squared canonical correlation, percent";

pub fn canonical_correlations(s: &PartitionedCovariance) -> Result<CcaSolution> {
    let (_, sxx_inv_root) = sym_sqrt_and_inv_sqrt(&s.sxx).ok_or(Error::NotPositiveDefinite { block: "S_XX" })?;
    let (_, syy_inv_root) = sym_sqrt_and_inv_sqrt(&s.syy).ok_or(Error::NotPositiveDefinite { block: "S_YY" })?;
    let whitened = &sxx_inv_root * &s.sxy * &syy_inv_root;
    let svd = SVD::new(whitened, true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let k = s.p().min(s.q());

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    order.truncate(k);

    let mut r2 = Vec::with_capacity(k);
    let mut a = DMatrix::zeros(s.q(), k);
    let mut b = DMatrix::zeros(s.p(), k);
    for (col, &idx) in order.iter().enumerate() {
        let sigma = svd.singular_values[idx];
        r2.push((sigma * sigma).min(1.0));
        let mut aj = &sxx_inv_root * u.column(idx);
        let mut bj = &syy_inv_root * v_t.row(idx).transpose();
        let lead = bj.iter().cloned().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            aj.neg_mut();
            bj.neg_mut();
        }
        a.set_column(col, &aj);
        b.set_column(col, &bj);
    }
    Ok(CcaSolution { r2, response_weights: b, predictor_weights: a })
}

/// Percentage of the total squared canonical correlation carried by each pair.
pub fn explained_variance(sol: &CcaSolution) -> Result<Vec<f64>> {
    let total: f64 = sol.r2.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroCorrelations);
    }
    Ok(sol.r2.iter().map(|r| 100.0 * r / total).collect())
}

/// Rank-`t` regression of the responses on the predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct RrrCoefficients {
    /// `p x q`.
    pub coefficients: DMatrix<f64>,
    /// `p`.
    pub intercept: DVector<f64>,
    pub rank: usize,
}

impl RrrCoefficients {
    pub fn forecast(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.coefficients.ncols() {
            return Err(Error::Dimension(alloc::format!(
                "predictor vector has length {}, expected {}",
                x.len(),
                self.coefficients.ncols()
            )));
        }
        Ok(&self.intercept + &self.coefficients * x)
    }
}

pub fn forecast(coeff: &RrrCoefficients, x: &DVector<f64>) -> Result<DVector<f64>> {
    coeff.forecast(x)
}

/// Keep the `t` strongest canonical pairs: `C_t = sum_{j<=t} r_j S_YY b_j a_j^T`.
///
/// `t = k` gives the least-squares coefficient `S_YX S_XX^{-1}`.
pub fn reduced_rank_coefficients(s: &PartitionedCovariance, sol: &CcaSolution, t: usize) -> Result<RrrCoefficients> {
    let k = sol.k();
    if t > k {
        return Err(Error::RankOutOfRange { t, max: k });
    }
    let mut c = DMatrix::zeros(s.p(), s.q());
    for j in 0..t {
        let r = sol.r2[j].sqrt();
        let left = &s.syy * sol.response_weights.column(j);
        c += r * left * sol.predictor_weights.column(j).transpose();
    }
    let intercept = &s.y_means - &c * &s.x_means;
    Ok(RrrCoefficients { coefficients: c, intercept, rank: t })
}

/// `tr(S_YY^{-1} E)` with `E` the residual covariance of `y - C x`.
pub fn weighted_residual_objective(s: &PartitionedCovariance, coeff: &RrrCoefficients) -> Result<f64> {
    let c = &coeff.coefficients;
    if c.nrows() != s.p() || c.ncols() != s.q() {
        return Err(Error::Dimension("coefficient shape does not match covariance blocks".into()));
    }
    let syx = s.syx();
    let resid = &s.syy - c * &s.sxy - &syx * c.transpose() + c * &s.sxx * c.transpose();
    let chol = s.syy.clone().cholesky().ok_or(Error::NotPositiveDefinite { block: "S_YY" })?;
    Ok(chol.solve(&resid).trace())
}
