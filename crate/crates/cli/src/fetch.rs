//! HTTP price client.
//!
//! The endpoint is a URL template with `{asset}` and optional `{start}` and
//! `{end}` placeholders (epoch seconds). Each asset's response body is a JSON
//! array `[{"t": <epoch>, "p": <price>}, ...]`.

use std::time::Duration;

use rmtfactor_core::ingest::{merge_on_intersection, PriceTable};
use serde::Deserialize;
use ureq::Agent;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Deserialize)]
struct Point {
    t: i64,
    p: f64,
}

#[derive(Debug, Clone)]
pub struct FetchRequest {
    pub endpoint: String,
    pub assets: Vec<String>,
    /// Inclusive epoch-second bounds.
    pub range: Option<(i64, i64)>,
    pub timeout: Duration,
}

impl FetchRequest {
    pub fn new(endpoint: impl Into<String>, assets: Vec<String>) -> Self {
        Self { endpoint: endpoint.into(), assets, range: None, timeout: Duration::from_secs(30) }
    }

    fn url(&self, asset: &str) -> String {
        let (start, end) = self.range.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
        self.endpoint.replace("{asset}", asset).replace("{start}", &start).replace("{end}", &end)
    }
}

pub fn fetch_prices(request: &FetchRequest) -> Result<PriceTable> {
    if !request.endpoint.contains("{asset}") {
        return Err(CliError::Config("endpoint template needs an `{asset}` placeholder".into()));
    }
    if request.assets.len() < 2 {
        return Err(CliError::Config("fetch needs at least two assets".into()));
    }
    let agent: Agent = Agent::config_builder().timeout_global(Some(request.timeout)).build().into();
    let mut series = Vec::with_capacity(request.assets.len());
    for asset in &request.assets {
        let url = request.url(asset);
        log::info!("fetching {asset} from {url}");
        let http = |message: String| CliError::Http { url: url.clone(), message };
        let mut response = agent.get(&url).call().map_err(|e| match e {
            ureq::Error::StatusCode(404) => http(format!("asset `{asset}` not found")),
            other => http(other.to_string()),
        })?;
        let body = response.body_mut().read_to_string().map_err(|e| http(e.to_string()))?;
        let points: Vec<Point> =
            serde_json::from_str(&body).map_err(|e| CliError::json(format!("response for `{asset}`"), e))?;
        let points = points
            .into_iter()
            .filter(|pt| request.range.is_none_or(|(a, b)| (a..=b).contains(&pt.t)))
            .map(|pt| (pt.t, pt.p))
            .collect();
        series.push((asset.clone(), points));
    }
    Ok(merge_on_intersection(series)?)
}
