//! Artifact files for each stage, with loaders so every output can feed the
//! next stage.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::Path;

use nalgebra::DMatrix;
use rmtfactor_core::cca::{CcaSolution, EXPLAINED_VARIANCE_CONVENTION, WEIGHT_NORMALIZATION};
use rmtfactor_core::graph::{DirectedFlowGraph, VariablePartition};
use rmtfactor_core::rmt::{Deflation, FactorCountReport};
use rmtfactor_core::symbolic::{GridScanReport, SteMatrix, SteParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CliError::csv(path, e))
}

fn expect_header(rdr: &mut csv::Reader<File>, path: &Path, want: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| CliError::csv(path, e))?;
    if header.iter().ne(want.iter().copied()) {
        return Err(CliError::format(path.display().to_string(), format!("header must be `{}`", want.join(","))));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize, path: &Path, line: usize) -> Result<T> {
    record
        .get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::format(format!("{}:{line}", path.display()), format!("bad value in column {}", i + 1)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::json(path.display().to_string(), e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path.display().to_string(), e))
}

const STE_HEADER: [&str; 5] = ["source", "target", "ste_bits", "pvalue", "significant"];

/// One row per ordered pair, source-major.
pub fn write_ste_csv(path: &Path, m: &SteMatrix) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| CliError::csv(path, e);
    w.write_record(STE_HEADER).map_err(err)?;
    for a in 0..m.dim() {
        for b in (0..m.dim()).filter(|&b| b != a) {
            w.write_record([
                m.names[a].clone(),
                m.names[b].clone(),
                m.value(a, b).to_string(),
                m.pvalue(a, b).to_string(),
                m.significant(a, b).to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Rebuild a matrix from its CSV. Names are ordered by first appearance; the
/// file does not record estimation settings, so `params` supplies them.
pub fn read_ste_csv(path: &Path, params: SteParams) -> Result<SteMatrix> {
    let mut rdr = reader(path)?;
    expect_header(&mut rdr, path, &STE_HEADER)?;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        let line = i + 2;
        let mut id = |name: &str| {
            *index.entry(name.to_owned()).or_insert_with(|| {
                names.push(name.to_owned());
                names.len() - 1
            })
        };
        let (a, b) = (id(&record[0]), id(&record[1]));
        if a == b {
            return Err(CliError::format(format!("{}:{line}", path.display()), "self-pair"));
        }
        let bits: f64 = field(&record, 2, path, line)?;
        let pvalue: f64 = field(&record, 3, path, line)?;
        let significant: bool = field(&record, 4, path, line)?;
        rows.push((a, b, bits, pvalue, significant));
    }
    let p = names.len();
    let mut values = vec![0.0; p * p];
    let mut pvalues = vec![1.0; p * p];
    let mut mask = vec![false; p * p];
    for (a, b, bits, pvalue, significant) in rows {
        values[a * p + b] = bits;
        pvalues[a * p + b] = pvalue;
        mask[a * p + b] = significant;
    }
    Ok(SteMatrix { names, values, pvalues, mask, params })
}

const GRID_HEADER: [&str; 5] = ["dt", "m", "total_bits", "count", "selected"];

pub fn write_grid_csv(path: &Path, report: &GridScanReport) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| CliError::csv(path, e);
    w.write_record(GRID_HEADER).map_err(err)?;
    for (i, row) in report.rows.iter().enumerate() {
        w.write_record([
            row.dt.to_string(),
            row.m.to_string(),
            row.total_bits.to_string(),
            row.count.to_string(),
            (report.selected == Some(i)).to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_grid_csv(path: &Path, tau: f64) -> Result<GridScanReport> {
    let mut rdr = reader(path)?;
    expect_header(&mut rdr, path, &GRID_HEADER)?;
    let mut rows = Vec::new();
    let mut selected = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        let line = i + 2;
        rows.push(rmtfactor_core::symbolic::GridRow {
            dt: field(&record, 0, path, line)?,
            m: field(&record, 1, path, line)?,
            total_bits: field(&record, 2, path, line)?,
            count: field(&record, 3, path, line)?,
        });
        if field::<bool>(&record, 4, path, line)? {
            selected = Some(i);
        }
    }
    Ok(GridScanReport { rows, selected, tau })
}

fn quoted(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz text; every node is declared so isolated assets still appear.
pub fn render_dot(g: &DirectedFlowGraph) -> String {
    let mut out = String::from("digraph {\n");
    for name in &g.nodes {
        let _ = writeln!(out, "  {};", quoted(name));
    }
    for e in &g.edges {
        let _ = writeln!(out, "  {} -> {} [weight={:.4}];", quoted(&g.nodes[e.from]), quoted(&g.nodes[e.to]), e.weight);
    }
    out.push_str("}\n");
    out
}

pub fn write_dot(path: &Path, g: &DirectedFlowGraph) -> Result<()> {
    fs::write(path, render_dot(g)).map_err(|e| CliError::io(path, e))
}

/// Partition by asset name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedPartition {
    pub predictors: Vec<String>,
    pub responses: Vec<String>,
}

impl NamedPartition {
    pub fn new(names: &[String], partition: &VariablePartition) -> Self {
        let pick = |idx: &[usize]| idx.iter().map(|&i| names[i].clone()).collect();
        Self { predictors: pick(&partition.predictors), responses: pick(&partition.responses) }
    }

    /// Column indices of the two groups within `assets`.
    pub fn resolve(&self, assets: &[String]) -> Result<VariablePartition> {
        let find = |name: &String| {
            assets
                .iter()
                .position(|a| a == name)
                .ok_or_else(|| CliError::Config(format!("partition names unknown asset `{name}`")))
        };
        let predictors = self.predictors.iter().map(find).collect::<Result<Vec<_>>>()?;
        let responses = self.responses.iter().map(find).collect::<Result<Vec<_>>>()?;
        if predictors.is_empty() || responses.is_empty() {
            return Err(CliError::Config("partition needs at least one predictor and one response".into()));
        }
        if predictors.iter().any(|i| responses.contains(i)) {
            return Err(CliError::Config("an asset is both predictor and response".into()));
        }
        Ok(VariablePartition { predictors, responses })
    }
}

const R2_HEADER: [&str; 4] = ["factor", "r2", "correlation", "explained_variance_pct"];

pub fn write_cca_r2_csv(path: &Path, sol: &CcaSolution, explained: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| CliError::csv(path, e);
    w.write_record(R2_HEADER).map_err(err)?;
    for (j, r2) in sol.r2.iter().enumerate() {
        let pct = explained.get(j).copied().unwrap_or(0.0);
        w.write_record([(j + 1).to_string(), r2.to_string(), r2.sqrt().to_string(), pct.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `(r2, explained variance)` columns.
pub fn read_cca_r2_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = reader(path)?;
    expect_header(&mut rdr, path, &R2_HEADER)?;
    let mut r2 = Vec::new();
    let mut pct = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        r2.push(field(&record, 1, path, i + 2)?);
        pct.push(field(&record, 3, path, i + 2)?);
    }
    Ok((r2, pct))
}

/// Rows are assets, columns factor indices.
pub fn write_weights_csv(path: &Path, names: &[String], weights: &DMatrix<f64>) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| CliError::csv(path, e);
    let mut header = vec!["asset".to_string()];
    header.extend((1..=weights.ncols()).map(|j| j.to_string()));
    w.write_record(&header).map_err(err)?;
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(weights.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_weights_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = reader(path)?;
    let k = rdr.headers().map_err(|e| CliError::csv(path, e))?.len().saturating_sub(1);
    let mut names = Vec::new();
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        names.push(record[0].to_owned());
        for j in 1..=k {
            values.push(field::<f64>(&record, j, path, i + 2)?);
        }
    }
    Ok((names.clone(), DMatrix::from_row_slice(names.len(), k, &values)))
}

/// Factor count with the conventions it was computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorsDocument {
    pub responses: usize,
    pub predictors: usize,
    pub samples: usize,
    pub deflation_convention: String,
    pub weight_normalization: String,
    pub explained_variance_convention: String,
    pub report: FactorCountReport,
}

impl FactorsDocument {
    pub fn new(report: FactorCountReport, p: usize, q: usize, n: usize) -> Self {
        let deflation_convention = match report.deflation {
            Deflation::On => "theta(p - j + 1, n - q - 1, q - j + 1) for root j",
            Deflation::Off => "theta(p, n - q - 1, q) for every root",
        };
        Self {
            responses: p,
            predictors: q,
            samples: n,
            deflation_convention: deflation_convention.into(),
            weight_normalization: WEIGHT_NORMALIZATION.into(),
            explained_variance_convention: EXPLAINED_VARIANCE_CONVENTION.into(),
            report,
        }
    }
}
