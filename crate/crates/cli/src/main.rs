use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmtfactor::error::{AtStage, CliError, Stage, StageError};
use rmtfactor::export::{self, FactorsDocument, NamedPartition};
use rmtfactor::fetch::{fetch_prices, FetchRequest};
use rmtfactor::pipeline::{self, InputSource, PipelineConfig, TestMethod};
use rmtfactor::tw_cache::{self, TableKey};
use rmtfactor::{panel, parallel};
use rmtfactor_core::cca::{canonical_correlations, explained_variance, partitioned_covariance, CcaSolution};
use rmtfactor_core::graph::{build_graph, partition_by_degree};
use rmtfactor_core::ingest::{compute_returns, stationarity_report, MissingPolicy, ReturnMatrix, Standardization};
use rmtfactor_core::rmt::painleve::{DEFAULT_STEP, DEFAULT_S_MAX, DEFAULT_S_MIN, DEFAULT_TOL};
use rmtfactor_core::rmt::{count_factors, Beta, Deflation};
use rmtfactor_core::symbolic::{SteParams, DEFAULT_SELECTION_TAU};

#[derive(Parser)]
#[command(name = "rmtfactor", version, about = "Count significant forecast factors in a price panel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download prices for several assets and write `prices.csv`.
    Fetch(FetchArgs),
    /// Turn a price file into `returns.csv` and `stationarity.json`.
    Ingest(IngestArgs),
    /// Pairwise transfer entropy at one (dt, m) cell, written to `ste.csv`.
    Ste(SteArgs),
    /// Scan a (dt, m) grid, written to `grid.csv`.
    Grid(GridArgs),
    /// Flow graph and predictor/response split from `ste.csv`.
    Partition(PartitionArgs),
    /// Canonical correlations and weights for a partitioned panel.
    Cca(CcaArgs),
    /// Sequential greatest-root factor count, written to `factors.json`.
    Factors(FactorsArgs),
    /// Generate a Tracy-Widom table file.
    TwTable(TwTableArgs),
    /// Every stage end to end, with `report.json`.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StandardizeArg {
    None,
    Zscore,
}

impl From<StandardizeArg> for Standardization {
    fn from(v: StandardizeArg) -> Self {
        match v {
            StandardizeArg::None => Standardization::None,
            StandardizeArg::Zscore => Standardization::ZScore,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum MissingArg {
    Reject,
    ForwardFill,
}

impl From<MissingArg> for MissingPolicy {
    fn from(v: MissingArg) -> Self {
        match v {
            MissingArg::Reject => MissingPolicy::Reject,
            MissingArg::ForwardFill => MissingPolicy::ForwardFill,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Chi2,
    Surrogate,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EndpointArgs {
    /// URL template with `{asset}` and optional `{start}`, `{end}` placeholders.
    #[arg(long)]
    endpoint: Option<String>,
    /// Comma-separated asset names for the endpoint.
    #[arg(long, value_delimiter = ',')]
    assets: Vec<String>,
    /// Inclusive start, epoch seconds.
    #[arg(long, requires = "end")]
    start: Option<i64>,
    /// Inclusive end, epoch seconds.
    #[arg(long, requires = "start")]
    end: Option<i64>,
}

impl EndpointArgs {
    fn request(&self) -> Option<FetchRequest> {
        let mut req = FetchRequest::new(self.endpoint.clone()?, self.assets.clone());
        req.range = self.start.zip(self.end);
        Some(req)
    }
}

#[derive(Args)]
struct FetchArgs {
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct IngestArgs {
    /// Price CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "reject")]
    missing: MissingArg,
    #[arg(long, value_enum, default_value = "none")]
    standardize: StandardizeArg,
    /// Smallest allowed |price| used as a divisor.
    #[arg(long, default_value_t = rmtfactor_core::ingest::DEFAULT_DIVISOR_FLOOR)]
    divisor_floor: f64,
    /// Level of the unit-root tests.
    #[arg(long, default_value_t = 0.01)]
    adf_level: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SteOptions {
    /// Delay between samples inside an ordinal pattern.
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// Prediction step of the target symbol.
    #[arg(long, default_value_t = 1)]
    delta: usize,
    #[arg(long = "ste-level", default_value_t = 0.10)]
    ste_level: f64,
    #[arg(long, value_enum, default_value = "chi2")]
    method: MethodArg,
    #[arg(long, default_value_t = 100)]
    surrogates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SteOptions {
    fn method(&self) -> TestMethod {
        match self.method {
            MethodArg::Chi2 => TestMethod::ChiSquared,
            MethodArg::Surrogate => TestMethod::Surrogate,
        }
    }

    fn params(&self, dt: usize, m: usize) -> SteParams {
        let mut cfg = PipelineConfig::from_file("");
        cfg.l = self.l;
        cfg.delta = self.delta;
        cfg.ste_level = self.ste_level;
        cfg.method = self.method();
        cfg.surrogates = self.surrogates;
        cfg.seed = self.seed;
        cfg.ste_params(dt, m)
    }

    /// Settings attached to a matrix read back from CSV; only the mask is used downstream.
    fn params_default() -> SteParams {
        PipelineConfig::from_file("").ste_params(1, 3)
    }
}

#[derive(Args)]
struct SteArgs {
    /// Returns CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    dt: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[command(flatten)]
    ste: SteOptions,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Returns CSV.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated forecast lags.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    dt: Vec<usize>,
    /// Comma-separated embedding dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    m: Vec<usize>,
    /// Cells within this fraction of the best significant-pair count compete on total bits.
    #[arg(long, default_value_t = DEFAULT_SELECTION_TAU)]
    tau: f64,
    #[command(flatten)]
    ste: SteOptions,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PartitionArgs {
    /// `ste.csv` from the `ste` subcommand.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CcaInput {
    /// Returns CSV.
    #[arg(long)]
    input: PathBuf,
    /// `partition.json` from the `partition` subcommand.
    #[arg(long)]
    partition: PathBuf,
    /// Added to the diagonal of both covariance blocks.
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
}

#[derive(Args)]
struct CcaArgs {
    #[command(flatten)]
    input: CcaInput,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FactorsArgs {
    #[command(flatten)]
    input: CcaInput,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "on")]
    deflate: Switch,
    /// Directory of cached Tracy-Widom tables.
    #[arg(long)]
    tw_cache: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TwTableArgs {
    #[arg(long, default_value_t = 1)]
    beta: u8,
    #[arg(long, default_value_t = DEFAULT_S_MIN, allow_hyphen_values = true)]
    s_min: f64,
    #[arg(long, default_value_t = DEFAULT_S_MAX, allow_hyphen_values = true)]
    s_max: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PipelineArgs {
    /// Price CSV; alternatively use `--endpoint`.
    #[arg(long, conflicts_with = "endpoint")]
    input: Option<PathBuf>,
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[arg(long, value_enum, default_value = "reject")]
    missing: MissingArg,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    dt: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    m: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SELECTION_TAU)]
    tau: f64,
    #[command(flatten)]
    ste: SteOptions,
    #[arg(long, value_enum, default_value = "none")]
    standardize: StandardizeArg,
    #[arg(long, default_value_t = rmtfactor_core::ingest::DEFAULT_DIVISOR_FLOOR)]
    divisor_floor: f64,
    #[arg(long, default_value_t = 0.01)]
    adf_level: f64,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "on")]
    deflate: Switch,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    #[arg(long)]
    tw_cache: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

fn deflation(s: Switch) -> Deflation {
    match s {
        Switch::On => Deflation::On,
        Switch::Off => Deflation::Off,
    }
}

fn out_dir(args: &OutArgs) -> Result<&Path, StageError> {
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e)).at(Stage::Config)?;
    Ok(&args.out)
}

fn load_returns(path: &Path) -> Result<ReturnMatrix, StageError> {
    panel::read_returns(path, Standardization::None).at(Stage::Ingest)
}

fn cca_stage(input: &CcaInput) -> Result<(ReturnMatrix, NamedPartition, CcaSolution, usize), StageError> {
    let returns = load_returns(&input.input)?;
    let named: NamedPartition = export::read_json(&input.partition).at(Stage::Partition)?;
    let split = named.resolve(&returns.assets).at(Stage::Partition)?;
    let x = returns.columns(&split.predictors);
    let y = returns.columns(&split.responses);
    let cov = partitioned_covariance(&x, &y, input.ridge).at(Stage::Cca)?;
    let sol = canonical_correlations(&cov).at(Stage::Cca)?;
    Ok((returns, named, sol, x.nrows()))
}

fn run(command: Command) -> Result<(), StageError> {
    match command {
        Command::Fetch(args) => {
            let request = args
                .endpoint
                .request()
                .ok_or_else(|| CliError::Config("--endpoint is required".into()))
                .at(Stage::Config)?;
            let prices = fetch_prices(&request).at(Stage::Fetch)?;
            panel::write_prices(&out_dir(&args.out)?.join("prices.csv"), &prices).at(Stage::Fetch)?;
        }
        Command::Ingest(args) => {
            let prices = panel::read_prices(&args.input, args.missing.into()).at(Stage::Ingest)?;
            let returns = compute_returns(&prices, args.standardize.into(), args.divisor_floor).at(Stage::Ingest)?;
            let dir = out_dir(&args.out)?;
            panel::write_returns(&dir.join("returns.csv"), &returns).at(Stage::Ingest)?;
            let adf = stationarity_report(&returns, args.adf_level).at(Stage::Stationarity)?;
            export::write_json(&dir.join("stationarity.json"), &adf).at(Stage::Stationarity)?;
        }
        Command::Ste(args) => {
            let returns = load_returns(&args.input)?;
            let matrix = parallel::ste_matrix(&returns, &args.ste.params(args.dt, args.m)).at(Stage::Ste)?;
            export::write_ste_csv(&out_dir(&args.out)?.join("ste.csv"), &matrix).at(Stage::Ste)?;
        }
        Command::Grid(args) => {
            let returns = load_returns(&args.input)?;
            let base = args.ste.params(args.dt.first().copied().unwrap_or(0), args.m.first().copied().unwrap_or(2));
            let (report, _) = parallel::grid_scan(&returns, &args.dt, &args.m, &base, args.tau).at(Stage::Grid)?;
            export::write_grid_csv(&out_dir(&args.out)?.join("grid.csv"), &report).at(Stage::Grid)?;
        }
        Command::Partition(args) => {
            let placeholder = SteOptions::params_default();
            let matrix = export::read_ste_csv(&args.input, placeholder).at(Stage::Partition)?;
            let graph = build_graph(&matrix);
            let named = NamedPartition::new(&matrix.names, &partition_by_degree(&graph));
            let dir = out_dir(&args.out)?;
            export::write_dot(&dir.join("graph.dot"), &graph).at(Stage::Partition)?;
            export::write_json(&dir.join("partition.json"), &named).at(Stage::Partition)?;
        }
        Command::Cca(args) => {
            let (_, named, sol, _) = cca_stage(&args.input)?;
            let explained = explained_variance(&sol).at(Stage::Cca)?;
            let dir = out_dir(&args.out)?;
            export::write_cca_r2_csv(&dir.join("cca_r2.csv"), &sol, &explained).at(Stage::Cca)?;
            export::write_weights_csv(
                &dir.join("cca_predictor_weights.csv"),
                &named.predictors,
                &sol.predictor_weights,
            )
            .at(Stage::Cca)?;
            export::write_weights_csv(&dir.join("cca_response_weights.csv"), &named.responses, &sol.response_weights)
                .at(Stage::Cca)?;
        }
        Command::Factors(args) => {
            let (_, named, sol, n) = cca_stage(&args.input)?;
            let table = pipeline::orthogonal_table(args.tw_cache.as_deref()).at(Stage::TwTable)?;
            let (p, q) = (named.responses.len(), named.predictors.len());
            let report =
                count_factors(&table, &sol, p, q, n, args.alpha, deflation(args.deflate)).at(Stage::Factors)?;
            println!("{}", report.retained);
            let doc = FactorsDocument::new(report, p, q, n);
            export::write_json(&out_dir(&args.out)?.join("factors.json"), &doc).at(Stage::Factors)?;
        }
        Command::TwTable(args) => {
            let key =
                TableKey { beta: args.beta, s_min: args.s_min, s_max: args.s_max, step: args.step, tol: args.tol };
            Beta::from_index(args.beta)
                .ok_or_else(|| CliError::Config(format!("--beta must be 1 or 2, got {}", args.beta)))
                .at(Stage::Config)?;
            let table = key.generate().at(Stage::TwTable)?;
            let path = out_dir(&args.out)?.join(key.file_name());
            tw_cache::write_table(&path, &table).at(Stage::TwTable)?;
            println!("{}", path.display());
        }
        Command::Pipeline(args) => {
            let input = match (&args.input, args.endpoint.request()) {
                (Some(path), _) => InputSource::File { path: path.clone(), missing: args.missing.into() },
                (None, Some(req)) => {
                    InputSource::Endpoint { template: req.endpoint, assets: req.assets, range: req.range }
                }
                (None, None) => {
                    return Err(CliError::Config("one of --input or --endpoint is required".into())).at(Stage::Config)
                }
            };
            let config = PipelineConfig {
                input,
                dts: args.dt,
                ms: args.m,
                l: args.ste.l,
                delta: args.ste.delta,
                ste_level: args.ste.ste_level,
                method: args.ste.method(),
                surrogates: args.ste.surrogates,
                seed: args.ste.seed,
                tau: args.tau,
                standardize: args.standardize.into(),
                divisor_floor: args.divisor_floor,
                adf_level: args.adf_level,
                alpha: args.alpha,
                deflation: deflation(args.deflate),
                ridge: args.ridge,
                tw_cache: args.tw_cache,
            };
            let report = pipeline::run_pipeline(&config, &args.out.out)?;
            println!(
                "selected dt={} m={}; {} predictors, {} responses; {} factors at alpha={}",
                report.grid.selected_dt,
                report.grid.selected_m,
                report.partition.predictors.len(),
                report.partition.responses.len(),
                report.factors.report.retained,
                config.alpha
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage.exit_code() as u8)
        }
    }
}
