//! Price panels, returns and the stationarity check.

mod adf;

pub use adf::{adf_critical_values, adf_test, stationarity_report, AdfResult, StationarityReport, ADF_MIN_LENGTH};

use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default smallest admissible divisor magnitude in [`compute_returns`].
pub const DEFAULT_DIVISOR_FLOOR: f64 = 1e-12;

/// Prices for `p` assets observed at `n` common timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    /// Epoch seconds, strictly increasing.
    pub timestamps: Vec<i64>,
    pub assets: Vec<String>,
    /// `n x p`.
    pub values: DMatrix<f64>,
}

impl PriceTable {
    pub fn new(timestamps: Vec<i64>, assets: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let (n, p) = values.shape();
        if timestamps.len() != n || assets.len() != p {
            return Err(Error::Dimension(alloc::format!(
                "{} timestamps and {} assets for a {n} x {p} matrix",
                timestamps.len(),
                assets.len()
            )));
        }
        if p < 2 {
            return Err(Error::Dimension(alloc::format!("need at least 2 assets, got {p}")));
        }
        if n < 3 {
            return Err(Error::SeriesTooShort { need: 3, got: n });
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneTimestamps { row: i + 1 });
        }
        check_finite(&values)?;
        Ok(Self { timestamps, assets, values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for (column, col) in values.column_iter().enumerate() {
        if let Some(row) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, column });
        }
    }
    Ok(())
}

/// Treatment of empty cells when assembling a price table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum MissingPolicy {
    #[default]
    Reject,
    /// Carry the previous row's value; a gap in the first row is still an error.
    ForwardFill,
}

/// Build a table from parsed rows, applying `policy` to missing cells.
pub fn assemble_prices(
    timestamps: Vec<i64>,
    assets: Vec<String>,
    rows: &[Vec<Option<f64>>],
    policy: MissingPolicy,
) -> Result<PriceTable> {
    let p = assets.len();
    let n = rows.len();
    let mut values = DMatrix::zeros(n, p);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != p {
            return Err(Error::Dimension(alloc::format!("row {i} has {} cells, expected {p}", row.len())));
        }
        for (j, cell) in row.iter().enumerate() {
            values[(i, j)] = match (cell, policy) {
                (Some(v), _) => *v,
                (None, MissingPolicy::ForwardFill) if i > 0 => values[(i - 1, j)],
                (None, _) => return Err(Error::MissingValue { row: i, asset: assets[j].clone() }),
            };
        }
    }
    PriceTable::new(timestamps, assets, values)
}

/// Align per-asset `(timestamp, price)` series on the timestamps they all share.
pub fn merge_on_intersection(series: Vec<(String, Vec<(i64, f64)>)>) -> Result<PriceTable> {
    if series.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let mut sorted: Vec<(String, Vec<(i64, f64)>)> = series
        .into_iter()
        .map(|(name, mut points)| {
            points.sort_by_key(|&(t, _)| t);
            (name, points)
        })
        .collect();
    for (_, points) in &sorted {
        if let Some(i) = points.windows(2).position(|w| w[1].0 == w[0].0) {
            return Err(Error::NonMonotoneTimestamps { row: i + 1 });
        }
    }
    let mut common: Vec<i64> = sorted[0].1.iter().map(|&(t, _)| t).collect();
    for (_, points) in &sorted[1..] {
        common.retain(|t| points.binary_search_by_key(t, |&(s, _)| s).is_ok());
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let mut values = DMatrix::zeros(common.len(), sorted.len());
    for (j, (_, points)) in sorted.iter_mut().enumerate() {
        for (i, t) in common.iter().enumerate() {
            let k = points.binary_search_by_key(t, |&(s, _)| s).expect("timestamp in intersection");
            values[(i, j)] = points[k].1;
        }
    }
    PriceTable::new(common, sorted.into_iter().map(|(name, _)| name).collect(), values)
}

/// Whether prices are z-scored (per asset) before differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Standardization {
    #[default]
    None,
    ZScore,
}

/// Simple returns, one row per consecutive price pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    pub assets: Vec<String>,
    /// Timestamp of the later price in each pair.
    pub timestamps: Vec<i64>,
    /// `(n - 1) x p`.
    pub values: DMatrix<f64>,
    pub standardization: Standardization,
}

impl ReturnMatrix {
    pub fn new(
        assets: Vec<String>,
        timestamps: Vec<i64>,
        values: DMatrix<f64>,
        standardization: Standardization,
    ) -> Result<Self> {
        if assets.len() != values.ncols() || timestamps.len() != values.nrows() {
            return Err(Error::Dimension(alloc::format!(
                "{} timestamps and {} assets for a {} x {} matrix",
                timestamps.len(),
                assets.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        check_finite(&values)?;
        Ok(Self { assets, timestamps, values, standardization })
    }

    /// The listed columns as an `n x k` block.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.values.nrows(), indices.len(), |i, j| self.values[(i, indices[j])])
    }
}

/// `R(t) = (Z(t + 1) - Z(t)) / Z(t)` with `Z` the raw or z-scored prices.
///
/// Fails when some `|Z(t)|` used as a divisor is below `floor`.
pub fn compute_returns(prices: &PriceTable, mode: Standardization, floor: f64) -> Result<ReturnMatrix> {
    let (n, p) = prices.values.shape();
    let mut z = prices.values.clone();
    if mode == Standardization::ZScore {
        for (j, mut col) in z.column_iter_mut().enumerate() {
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
            if !(var > 0.0) {
                return Err(Error::DivisionByZero { row: 0, asset: prices.assets[j].clone(), value: 0.0 });
            }
            let sd = var.sqrt();
            col.apply(|v| *v = (*v - mean) / sd);
        }
    }
    let mut r = DMatrix::zeros(n - 1, p);
    for j in 0..p {
        for t in 0..n - 1 {
            let base = z[(t, j)];
            if !(base.abs() >= floor) {
                return Err(Error::DivisionByZero { row: t, asset: prices.assets[j].clone(), value: base });
            }
            r[(t, j)] = (z[(t + 1, j)] - base) / base;
        }
    }
    ReturnMatrix::new(prices.assets.clone(), prices.timestamps[1..].to_vec(), r, mode)
}
