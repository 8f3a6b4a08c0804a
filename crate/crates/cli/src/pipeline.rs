//! End-to-end run: prices, returns, lag/embedding scan, flow graph, partition,
//! canonical correlations and the factor count.

use std::fs;
use std::path::{Path, PathBuf};

use rmtfactor_core::cca::{
    canonical_correlations, explained_variance, partitioned_covariance, EXPLAINED_VARIANCE_CONVENTION,
    WEIGHT_NORMALIZATION,
};
use rmtfactor_core::graph::{build_graph, partition_by_degree};
use rmtfactor_core::ingest::{
    compute_returns, stationarity_report, MissingPolicy, PriceTable, ReturnMatrix, Standardization,
    DEFAULT_DIVISOR_FLOOR,
};
use rmtfactor_core::rmt::{count_factors, Beta, Deflation, TracyWidomTable};
use rmtfactor_core::symbolic::{GridRow, SignificanceMethod, SteParams, DEFAULT_SELECTION_TAU};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AtStage, CliError, Result, Stage, StageError};
use crate::export::{self, FactorsDocument, NamedPartition};
use crate::fetch::{fetch_prices, FetchRequest};
use crate::panel;
use crate::parallel;
use crate::tw_cache::{self, TableKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    File { path: PathBuf, missing: MissingPolicy },
    Endpoint { template: String, assets: Vec<String>, range: Option<(i64, i64)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ChiSquared,
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub dts: Vec<usize>,
    pub ms: Vec<usize>,
    pub l: usize,
    pub delta: usize,
    pub ste_level: f64,
    pub method: TestMethod,
    pub surrogates: usize,
    pub seed: u64,
    pub tau: f64,
    pub standardize: Standardization,
    pub divisor_floor: f64,
    pub adf_level: f64,
    pub alpha: f64,
    pub deflation: Deflation,
    pub ridge: f64,
    pub tw_cache: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_file(path: impl Into<PathBuf>) -> Self {
        Self {
            input: InputSource::File { path: path.into(), missing: MissingPolicy::Reject },
            dts: vec![0, 1, 2, 3],
            ms: vec![2, 3, 4],
            l: 1,
            delta: 1,
            ste_level: 0.10,
            method: TestMethod::ChiSquared,
            surrogates: 100,
            seed: 0,
            tau: DEFAULT_SELECTION_TAU,
            standardize: Standardization::None,
            divisor_floor: DEFAULT_DIVISOR_FLOOR,
            adf_level: 0.01,
            alpha: 0.01,
            deflation: Deflation::On,
            ridge: 0.0,
            tw_cache: None,
        }
    }

    pub fn ste_params(&self, dt: usize, m: usize) -> SteParams {
        let method = match self.method {
            TestMethod::ChiSquared => SignificanceMethod::ChiSquared,
            TestMethod::Surrogate => SignificanceMethod::Surrogate { count: self.surrogates, seed: self.seed },
        };
        SteParams { dt, m, l: self.l, delta: self.delta, level: self.ste_level, method }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("ste_level", self.ste_level)?;
        unit("alpha", self.alpha)?;
        unit("adf_level", self.adf_level)?;
        if self.dts.is_empty() || self.ms.is_empty() {
            return Err(CliError::Config("dt and m grids must be nonempty".into()));
        }
        if let Some(m) = self.ms.iter().find(|&&m| !(2..=7).contains(&m)) {
            return Err(CliError::Config(format!("embedding dimension {m} outside 2..=7")));
        }
        if self.l == 0 || self.delta == 0 {
            return Err(CliError::Config("l and delta must be at least 1".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(CliError::Config(format!("tau must lie in (0, 1], got {}", self.tau)));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(CliError::Config(format!("ridge must be nonnegative, got {}", self.ridge)));
        }
        Ok(())
    }

    /// SHA-256 of the JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    /// RFC 3339; the only field that differs between identical runs.
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub assets: usize,
    pub price_rows: usize,
    pub return_rows: usize,
    pub first_timestamp: i64,
    pub last_timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetStationarity {
    pub asset: String,
    pub statistic: f64,
    pub pvalue: f64,
    pub lags: usize,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaritySummary {
    pub level: f64,
    pub all_stationary: bool,
    pub tests: Vec<AssetStationarity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub rows: Vec<GridRow>,
    pub tau: f64,
    pub selected_dt: usize,
    pub selected_m: usize,
    pub significant_pairs: usize,
    pub total_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcaSummary {
    pub r2: Vec<f64>,
    pub explained_variance_pct: Vec<f64>,
    pub weight_normalization: String,
    pub explained_variance_convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub provenance: Provenance,
    pub config: PipelineConfig,
    pub panel: PanelSummary,
    pub stationarity: StationaritySummary,
    pub grid: GridSummary,
    pub edges: usize,
    pub partition: NamedPartition,
    pub cca: CcaSummary,
    pub factors: FactorsDocument,
    pub artifacts: Vec<String>,
}

impl PipelineReport {
    /// The JSON document with `generated_at` blanked, for reproducibility checks.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.provenance.generated_at = String::new();
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }
}

pub const REPORT_FILE: &str = "report.json";

pub fn load_prices(source: &InputSource) -> Result<PriceTable, StageError> {
    match source {
        InputSource::File { path, missing } => panel::read_prices(path, *missing).at(Stage::Ingest),
        InputSource::Endpoint { template, assets, range } => {
            let mut request = FetchRequest::new(template.clone(), assets.clone());
            request.range = *range;
            fetch_prices(&request).at(Stage::Fetch)
        }
    }
}

/// Orthogonal Tracy-Widom law on the default grid, from `cache` when given.
pub fn orthogonal_table(cache: Option<&Path>) -> Result<TracyWidomTable> {
    let key = TableKey::new(Beta::One);
    match cache {
        Some(dir) => Ok(tw_cache::load_or_generate(dir, &key)?.0),
        None => tw_cache::normalized(&key.generate()?),
    }
}

fn returns_summary(prices: &PriceTable, returns: &ReturnMatrix) -> PanelSummary {
    PanelSummary {
        assets: prices.p(),
        price_rows: prices.n(),
        return_rows: returns.values.nrows(),
        first_timestamp: prices.timestamps[0],
        last_timestamp: *prices.timestamps.last().expect("nonempty"),
    }
}

/// Run every stage, writing artifacts and `report.json` into `out`.
pub fn run_pipeline(config: &PipelineConfig, out: &Path) -> Result<PipelineReport, StageError> {
    config.validate().at(Stage::Config)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e)).at(Stage::Report)?;
    let mut artifacts = Vec::new();
    let mut emit = |name: &str| {
        artifacts.push(name.to_string());
        out.join(name)
    };

    let prices = load_prices(&config.input)?;
    if matches!(config.input, InputSource::Endpoint { .. }) {
        panel::write_prices(&emit("prices.csv"), &prices).at(Stage::Fetch)?;
    }
    let returns = compute_returns(&prices, config.standardize, config.divisor_floor).at(Stage::Ingest)?;
    panel::write_returns(&emit("returns.csv"), &returns).at(Stage::Ingest)?;

    let adf = stationarity_report(&returns, config.adf_level).at(Stage::Stationarity)?;
    if !adf.all_stationary() {
        log::warn!("some return series keep a unit root at level {}", config.adf_level);
    }
    let stationarity = StationaritySummary {
        level: adf.level,
        all_stationary: adf.all_stationary(),
        tests: adf
            .assets
            .iter()
            .zip(&adf.results)
            .map(|(asset, r)| AssetStationarity {
                asset: asset.clone(),
                statistic: r.statistic,
                pvalue: r.pvalue,
                lags: r.lags,
                reject: r.reject,
            })
            .collect(),
    };

    let base = config.ste_params(config.dts[0], config.ms[0]);
    let (grid, matrices) = parallel::grid_scan(&returns, &config.dts, &config.ms, &base, config.tau).at(Stage::Grid)?;
    export::write_grid_csv(&emit("grid.csv"), &grid).at(Stage::Grid)?;
    let chosen = grid.selected.ok_or_else(|| CliError::Config("grid scan selected no cell".into())).at(Stage::Grid)?;
    let ste = &matrices[chosen];
    export::write_ste_csv(&emit("ste.csv"), ste).at(Stage::Ste)?;

    let graph = build_graph(ste);
    export::write_dot(&emit("graph.dot"), &graph).at(Stage::Partition)?;
    let split = partition_by_degree(&graph);
    let named = NamedPartition::new(&returns.assets, &split);
    export::write_json(&emit("partition.json"), &named).at(Stage::Partition)?;
    if split.predictors.is_empty() || split.responses.is_empty() {
        return Err(CliError::Config(format!(
            "partition is one-sided ({} predictors, {} responses)",
            split.predictors.len(),
            split.responses.len()
        )))
        .at(Stage::Partition);
    }

    let x = returns.columns(&split.predictors);
    let y = returns.columns(&split.responses);
    let cov = partitioned_covariance(&x, &y, config.ridge).at(Stage::Cca)?;
    let sol = canonical_correlations(&cov).at(Stage::Cca)?;
    let explained = explained_variance(&sol).at(Stage::Cca)?;
    export::write_cca_r2_csv(&emit("cca_r2.csv"), &sol, &explained).at(Stage::Cca)?;
    export::write_weights_csv(&emit("cca_predictor_weights.csv"), &named.predictors, &sol.predictor_weights)
        .at(Stage::Cca)?;
    export::write_weights_csv(&emit("cca_response_weights.csv"), &named.responses, &sol.response_weights)
        .at(Stage::Cca)?;

    let table = orthogonal_table(config.tw_cache.as_deref()).at(Stage::TwTable)?;
    let (p, q, n) = (split.responses.len(), split.predictors.len(), x.nrows());
    let factors = count_factors(&table, &sol, p, q, n, config.alpha, config.deflation).at(Stage::Factors)?;
    let factors = FactorsDocument::new(factors, p, q, n);
    export::write_json(&emit("factors.json"), &factors).at(Stage::Factors)?;

    let report_path = emit(REPORT_FILE);
    let report = PipelineReport {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        config: config.clone(),
        panel: returns_summary(&prices, &returns),
        stationarity,
        grid: GridSummary {
            tau: grid.tau,
            selected_dt: grid.rows[chosen].dt,
            selected_m: grid.rows[chosen].m,
            significant_pairs: grid.rows[chosen].count,
            total_bits: grid.rows[chosen].total_bits,
            rows: grid.rows.clone(),
        },
        edges: graph.edges.len(),
        partition: named,
        cca: CcaSummary {
            r2: sol.r2.clone(),
            explained_variance_pct: explained,
            weight_normalization: WEIGHT_NORMALIZATION.into(),
            explained_variance_convention: EXPLAINED_VARIANCE_CONVENTION.into(),
        },
        factors,
        artifacts,
    };
    export::write_json(&report_path, &report).at(Stage::Report)?;
    Ok(report)
}
