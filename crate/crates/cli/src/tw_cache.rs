//! On-disk Tracy-Widom tables: CSV `x,y,cdv` with the density estimate in `y`
//! and the distribution function in `cdv`.
//!
//! `y` holds the backward difference quotient `(F(x) - F(x - h)) / h`, the
//! column printed in the classic published tables. Files are keyed by
//! `(beta, s_min, s_max, step, tol)` through their name. Loading uses only the
//! `cdv` column, which is written at full precision and reloads exactly.

use std::fs;
use std::path::{Path, PathBuf};

use rmtfactor_core::rmt::painleve::{DEFAULT_STEP, DEFAULT_S_MAX, DEFAULT_S_MIN, DEFAULT_TOL};
use rmtfactor_core::rmt::{tw_table, Beta, TableMeta, TracyWidomTable};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

const HEADER: [&str; 3] = ["x", "y", "cdv"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableKey {
    pub beta: u8,
    pub s_min: f64,
    pub s_max: f64,
    pub step: f64,
    pub tol: f64,
}

impl TableKey {
    pub fn new(beta: Beta) -> Self {
        Self { beta: beta.index(), s_min: DEFAULT_S_MIN, s_max: DEFAULT_S_MAX, step: DEFAULT_STEP, tol: DEFAULT_TOL }
    }

    pub fn beta(&self) -> Result<Beta> {
        Beta::from_index(self.beta).ok_or_else(|| CliError::Config(format!("beta must be 1 or 2, got {}", self.beta)))
    }

    pub fn file_name(&self) -> String {
        format!("tw_beta{}_s{:e}_{:e}_h{:e}_tol{:e}.csv", self.beta, self.s_min, self.s_max, self.step, self.tol)
    }

    pub fn generate(&self) -> Result<TracyWidomTable> {
        Ok(tw_table(self.beta()?, self.s_min, self.s_max, self.step, self.tol)?)
    }
}

/// Shortest round-trip decimal, padded to at least six places.
fn decimal(v: f64) -> String {
    let mut s = v.to_string();
    let places = s.find('.').map_or(0, |dot| s.len() - dot - 1);
    if places == 0 {
        s.push('.');
    }
    for _ in places..6 {
        s.push('0');
    }
    s
}

pub fn write_table(path: &Path, table: &TracyWidomTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(HEADER).map_err(|e| CliError::csv(path, e))?;
    let quotients = table.difference_quotients();
    for ((x, y), c) in table.grid().iter().zip(&quotients).zip(table.cdf_values()) {
        w.write_record([decimal(*x), decimal(*y), decimal(*c)]).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Raw `(x, y, cdv)` columns.
pub fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = rdr.headers().map_err(|e| CliError::csv(path, e))?;
    if header.iter().ne(HEADER) {
        return Err(CliError::format(path.display().to_string(), "header must be `x,y,cdv`"));
    }
    let (mut x, mut y, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        let parse = |j: usize| {
            record.get(j).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| {
                CliError::format(format!("{}:{}", path.display(), i + 2), format!("bad number in column {}", j + 1))
            })
        };
        x.push(parse(0)?);
        y.push(parse(1)?);
        c.push(parse(2)?);
    }
    Ok((x, y, c))
}

pub fn read_table(path: &Path, key: &TableKey) -> Result<TracyWidomTable> {
    let (grid, _, cdf) = read_columns(path)?;
    let meta = TableMeta { step: key.step, tol: key.tol, s_start: key.s_max };
    let points = ((key.s_max - key.s_min) / key.step).round() as usize + 1;
    if grid.len() != points
        || grid.first() != Some(&key.s_min)
        || grid.last().is_none_or(|&s| (s - key.s_max).abs() > 1e-9)
    {
        return Err(CliError::format(path.display().to_string(), "grid does not match the file's key"));
    }
    Ok(TracyWidomTable::from_cdf(key.beta()?, grid, cdf, meta)?)
}

/// Load the keyed table from `dir`, generating and storing it on a miss.
///
/// A generated table is passed through the same cdf-only reconstruction as a
/// loaded one, so results do not depend on whether the cache was warm.
pub fn load_or_generate(dir: &Path, key: &TableKey) -> Result<(TracyWidomTable, PathBuf)> {
    let path = dir.join(key.file_name());
    if path.exists() {
        log::info!("loading Tracy-Widom table {}", path.display());
        return Ok((read_table(&path, key)?, path));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    log::info!("generating Tracy-Widom table {}", path.display());
    let table = key.generate()?;
    write_table(&path, &table)?;
    Ok((normalized(&table)?, path))
}

/// The table as it would come back from disk: rebuilt from its grid and cdf.
pub fn normalized(table: &TracyWidomTable) -> Result<TracyWidomTable> {
    Ok(TracyWidomTable::from_cdf(table.beta(), table.grid().to_vec(), table.cdf_values().to_vec(), table.meta())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_padded() {
        assert_eq!(decimal(2.0), "2.000000");
        assert_eq!(decimal(-0.25), "-0.250000");
        assert_eq!(decimal(0.98959757108483), "0.98959757108483");
        assert_eq!(decimal(0.1234567).parse::<f64>().unwrap(), 0.1234567);
    }

    #[test]
    fn file_names_carry_the_key() {
        assert_eq!(TableKey::new(Beta::One).file_name(), "tw_beta1_s-1.3e1_6e0_h5e-3_tol1e-13.csv");
    }
}
