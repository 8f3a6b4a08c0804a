//! All-pairs transfer entropy on a return panel and the lag/embedding grid scan.

use alloc::string::String;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::ste::{chi2_pvalue, ste, surrogate_exceedances, Counter, MIN_SURROGATES};
use super::{symbolize, SymbolSequence};
use crate::error::{Error, Result};
use crate::ingest::ReturnMatrix;

/// Default share of the best pair count a grid cell needs to be eligible.
pub const DEFAULT_SELECTION_TAU: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum SignificanceMethod {
    ChiSquared,
    Surrogate { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SteParams {
    /// Forecast lag: the target series is advanced by `dt` samples.
    pub dt: usize,
    pub m: usize,
    pub l: usize,
    pub delta: usize,
    pub level: f64,
    pub method: SignificanceMethod,
}

impl SteParams {
    fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.delta == 0 {
            return Err(Error::InvalidParameter("delta must be at least 1".into()));
        }
        if let SignificanceMethod::Surrogate { count, .. } = self.method {
            if count < MIN_SURROGATES {
                return Err(Error::InvalidParameter(alloc::format!(
                    "need at least {MIN_SURROGATES} surrogates, got {count}"
                )));
            }
        }
        Ok(())
    }
}

/// Transfer entropy between every ordered pair of assets. Row index is the
/// source, column index the target; the diagonal is zero and never significant.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SteMatrix {
    pub names: Vec<String>,
    /// Row-major `p x p`, bits.
    pub values: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub mask: Vec<bool>,
    pub params: SteParams,
}

impl SteMatrix {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn value(&self, source: usize, target: usize) -> f64 {
        self.values[source * self.dim() + target]
    }

    pub fn pvalue(&self, source: usize, target: usize) -> f64 {
        self.pvalues[source * self.dim() + target]
    }

    pub fn significant(&self, source: usize, target: usize) -> bool {
        self.mask[source * self.dim() + target]
    }

    pub fn significant_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Sum of the significant entries, bits.
    pub fn significant_total(&self) -> f64 {
        self.values.iter().zip(&self.mask).filter(|(_, &m)| m).fold(0.0, |acc, (v, _)| acc + v)
    }
}

/// Symbolized panel ready for pair evaluation; pairs are independent, so callers
/// may evaluate them in any order or in parallel.
#[derive(Debug, Clone)]
pub struct PairwiseSte {
    names: Vec<String>,
    symbols: Vec<SymbolSequence>,
    aligned: usize,
    params: SteParams,
}

impl PairwiseSte {
    pub fn prepare(returns: &ReturnMatrix, params: &SteParams) -> Result<Self> {
        params.validate()?;
        let p = returns.assets.len();
        if p < 2 {
            return Err(Error::Dimension(alloc::format!("need at least 2 assets, got {p}")));
        }
        let n = returns.values.nrows();
        let span = (params.m.max(1) - 1) * params.l;
        let aligned = n.saturating_sub(params.dt + span);
        if aligned <= params.delta {
            return Err(Error::SeriesTooShort { need: params.dt + span + params.delta + 1, got: n });
        }
        let symbols = (0..p)
            .map(|j| {
                let col: Vec<f64> = returns.values.column(j).iter().copied().collect();
                symbolize(&col, params.m, params.l)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { names: returns.assets.clone(), symbols, aligned, params: *params })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn params(&self) -> &SteParams {
        &self.params
    }

    /// Off-diagonal ordered pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.dim();
        (0..p).flat_map(move |a| (0..p).filter(move |&b| b != a).map(move |b| (a, b)))
    }

    /// `(bits, p-value)` for the flow from asset `a` to asset `b` advanced by `dt`.
    pub fn evaluate(&self, a: usize, b: usize) -> Result<(f64, f64)> {
        let source = self.symbols[a].window(0, self.aligned);
        let target = self.symbols[b].window(self.params.dt, self.aligned);
        let est = ste(&source, &target, self.params.delta)?;
        let pvalue = match self.params.method {
            SignificanceMethod::ChiSquared => {
                chi2_pvalue(&est, (est.target_alphabet, est.source_alphabet), est.triples)?
            }
            SignificanceMethod::Surrogate { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((a * self.dim() + b) as u64);
                surrogate_exceedances(
                    &mut Counter::default(),
                    &target.symbols,
                    &source.symbols,
                    self.params.delta,
                    target.alphabet_size(),
                    est.value,
                    count,
                    &mut rng,
                )
            }
        };
        Ok((est.value, pvalue))
    }

    /// Build the matrix from `((a, b), (bits, p-value))` results in any order.
    pub fn assemble<I>(&self, results: I) -> SteMatrix
    where
        I: IntoIterator<Item = ((usize, usize), (f64, f64))>,
    {
        let p = self.dim();
        let mut values = alloc::vec![0.0; p * p];
        let mut pvalues = alloc::vec![1.0; p * p];
        let mut mask = alloc::vec![false; p * p];
        for ((a, b), (v, pv)) in results {
            if a == b {
                continue;
            }
            values[a * p + b] = v;
            pvalues[a * p + b] = pv;
            mask[a * p + b] = pv < self.params.level;
        }
        SteMatrix { names: self.names.clone(), values, pvalues, mask, params: self.params }
    }
}

pub fn pairwise_ste_matrix(returns: &ReturnMatrix, params: &SteParams) -> Result<SteMatrix> {
    let prepared = PairwiseSte::prepare(returns, params)?;
    let results =
        prepared.pairs().map(|(a, b)| prepared.evaluate(a, b).map(|r| ((a, b), r))).collect::<Result<Vec<_>>>()?;
    Ok(prepared.assemble(results))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GridRow {
    pub dt: usize,
    pub m: usize,
    pub total_bits: f64,
    pub count: usize,
}

impl GridRow {
    pub fn from_matrix(matrix: &SteMatrix) -> Self {
        Self {
            dt: matrix.params.dt,
            m: matrix.params.m,
            total_bits: matrix.significant_total(),
            count: matrix.significant_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GridScanReport {
    pub rows: Vec<GridRow>,
    /// Index into `rows` of the chosen cell.
    pub selected: Option<usize>,
    pub tau: f64,
}

impl GridScanReport {
    pub fn from_rows(rows: Vec<GridRow>, tau: f64) -> Self {
        let selected = select_cell(&rows, tau);
        Self { rows, selected, tau }
    }

    pub fn selected_row(&self) -> Option<&GridRow> {
        self.selected.map(|i| &self.rows[i])
    }
}

/// Among cells whose significant-pair count reaches `tau` times the best count,
/// the one with the largest total bits (earliest on ties).
pub fn select_cell(rows: &[GridRow], tau: f64) -> Option<usize> {
    let best = rows.iter().map(|r| r.count).max()?;
    let threshold = tau * best as f64;
    let mut chosen: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if (r.count as f64) < threshold {
            continue;
        }
        if chosen.is_none_or(|c| r.total_bits > rows[c].total_bits) {
            chosen = Some(i);
        }
    }
    chosen
}

/// One all-pairs matrix per `(dt, m)` cell, `dt` varying slowest.
pub fn grid_scan(
    returns: &ReturnMatrix,
    dts: &[usize],
    ms: &[usize],
    base: &SteParams,
    tau: f64,
) -> Result<GridScanReport> {
    if dts.is_empty() || ms.is_empty() {
        return Err(Error::InvalidParameter("lag and embedding grids must be nonempty".into()));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("tau must lie in (0, 1], got {tau}")));
    }
    let mut rows = Vec::with_capacity(dts.len() * ms.len());
    for &dt in dts {
        for &m in ms {
            let params = SteParams { dt, m, ..*base };
            rows.push(GridRow::from_matrix(&pairwise_ste_matrix(returns, &params)?));
        }
    }
    Ok(GridScanReport::from_rows(rows, tau))
}
