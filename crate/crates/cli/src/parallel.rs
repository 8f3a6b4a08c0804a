//! Multi-threaded drivers for the pairwise transfer-entropy computations.
//!
//! Each ordered pair draws from its own random stream, so these agree exactly
//! with the serial functions in the core crate.

use rayon::prelude::*;
use rmtfactor_core::ingest::ReturnMatrix;
use rmtfactor_core::symbolic::{GridRow, GridScanReport, PairwiseSte, SteMatrix, SteParams};

use crate::error::{CliError, Result};

pub fn ste_matrix(returns: &ReturnMatrix, params: &SteParams) -> Result<SteMatrix> {
    let prepared = PairwiseSte::prepare(returns, params)?;
    let pairs: Vec<(usize, usize)> = prepared.pairs().collect();
    let results =
        pairs.par_iter().map(|&(a, b)| prepared.evaluate(a, b).map(|r| ((a, b), r))).collect::<Result<Vec<_>, _>>()?;
    Ok(prepared.assemble(results))
}

/// All cells of the `(dt, m)` grid, `dt` varying slowest, with the matrix of
/// each cell.
pub fn grid_scan(
    returns: &ReturnMatrix,
    dts: &[usize],
    ms: &[usize],
    base: &SteParams,
    tau: f64,
) -> Result<(GridScanReport, Vec<SteMatrix>)> {
    if dts.is_empty() || ms.is_empty() {
        return Err(CliError::Config("lag and embedding grids must be nonempty".into()));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(CliError::Config(format!("tau must lie in (0, 1], got {tau}")));
    }
    let mut matrices = Vec::with_capacity(dts.len() * ms.len());
    for &dt in dts {
        for &m in ms {
            log::info!("scanning dt = {dt}, m = {m}");
            matrices.push(ste_matrix(returns, &SteParams { dt, m, ..*base })?);
        }
    }
    let rows = matrices.iter().map(GridRow::from_matrix).collect();
    Ok((GridScanReport::from_rows(rows, tau), matrices))
}
