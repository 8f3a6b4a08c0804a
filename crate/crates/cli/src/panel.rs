//! Price and return panels as CSV: `timestamp,<asset1>,...,<assetP>`.
//!
//! Timestamps are integer epoch seconds or ISO-8601 (UTC when no offset is
//! given). Returns are written with epoch timestamps and shortest round-trip
//! floats, so a written file reloads bit-for-bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use nalgebra::DMatrix;
use rmtfactor_core::ingest::{assemble_prices, MissingPolicy, PriceTable, ReturnMatrix, Standardization};

use crate::error::{CliError, Result};

pub fn parse_timestamp(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(secs) = field.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(field) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(field, fmt) {
            return Some(naive.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

/// Header names, timestamps and cells (`None` for empty) of a panel file.
struct RawPanel {
    assets: Vec<String>,
    timestamps: Vec<i64>,
    rows: Vec<Vec<Option<f64>>>,
}

fn read_raw<R: Read>(reader: R, origin: &Path) -> Result<RawPanel> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers().map_err(|e| CliError::csv(origin, e))?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("timestamp") {
        return Err(CliError::format(origin.display().to_string(), "header must be `timestamp,<asset>,...`"));
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(origin, e))?;
        let line = i + 2;
        let at = || format!("{}:{line}", origin.display());
        if record.len() != header.len() {
            return Err(CliError::format(at(), format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let t = parse_timestamp(&record[0])
            .ok_or_else(|| CliError::format(at(), format!("bad timestamp `{}`", &record[0])))?;
        let cells = record
            .iter()
            .skip(1)
            .map(|cell| {
                if cell.is_empty() {
                    return Ok(None);
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(CliError::format(at(), format!("bad number `{cell}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        timestamps.push(t);
        rows.push(cells);
    }
    Ok(RawPanel { assets, timestamps, rows })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

pub fn parse_prices<R: Read>(reader: R, policy: MissingPolicy, origin: &Path) -> Result<PriceTable> {
    let raw = read_raw(reader, origin)?;
    Ok(assemble_prices(raw.timestamps, raw.assets, &raw.rows, policy)?)
}

pub fn read_prices(path: &Path, policy: MissingPolicy) -> Result<PriceTable> {
    parse_prices(open(path)?, policy, path)
}

fn write_panel<W: Write>(writer: W, assets: &[String], timestamps: &[i64], values: &DMatrix<f64>) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_field("timestamp")?;
    csv.write_record(assets)?;
    for (i, t) in timestamps.iter().enumerate() {
        csv.write_field(t.to_string())?;
        csv.write_record(values.row(i).iter().map(|v| v.to_string()))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_prices(path: &Path, prices: &PriceTable) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_panel(file, &prices.assets, &prices.timestamps, &prices.values).map_err(|e| CliError::csv(path, e))
}

pub fn write_returns(path: &Path, returns: &ReturnMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_panel(file, &returns.assets, &returns.timestamps, &returns.values).map_err(|e| CliError::csv(path, e))
}

/// Load a returns file. The standardization mode is not stored in the file,
/// so the caller states it.
pub fn read_returns(path: &Path, standardization: Standardization) -> Result<ReturnMatrix> {
    let raw = read_raw(open(path)?, path)?;
    let (n, p) = (raw.rows.len(), raw.assets.len());
    let mut values = DMatrix::zeros(n, p);
    for (i, row) in raw.rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            values[(i, j)] = cell.ok_or_else(|| {
                CliError::format(format!("{}:{}", path.display(), i + 2), "returns cannot have empty cells")
            })?;
        }
    }
    Ok(ReturnMatrix::new(raw.assets, raw.timestamps, values, standardization)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, policy: MissingPolicy) -> Result<PriceTable> {
        parse_prices(text.as_bytes(), policy, Path::new("inline.csv"))
    }

    #[test]
    fn timestamps_in_both_forms() {
        assert_eq!(parse_timestamp("1700000000"), Some(1_700_000_000));
        assert_eq!(parse_timestamp("1970-01-02"), Some(86_400));
        assert_eq!(parse_timestamp("1970-01-01T00:01:00Z"), Some(60));
        assert_eq!(parse_timestamp("1970-01-01T01:00:00+01:00"), Some(0));
        assert_eq!(parse_timestamp("1970-01-01 00:00:05"), Some(5));
        assert_eq!(parse_timestamp("yesterday"), None);
    }

    #[test]
    fn three_row_file() {
        let t = parse("timestamp,a,b\n1,1.0,2.0\n2,1.5,2.5\n3,2.0,3.0\n", MissingPolicy::Reject).unwrap();
        assert_eq!((t.n(), t.p()), (3, 2));
        assert_eq!(t.assets, vec!["a", "b"]);
    }

    #[test]
    fn empty_cell_by_policy() {
        let text = "timestamp,a,b\n1,1.0,2.0\n2,,2.5\n3,2.0,3.0\n4,2.5,\n";
        assert!(parse(text, MissingPolicy::Reject).is_err());
        let t = parse(text, MissingPolicy::ForwardFill).unwrap();
        assert_eq!(t.values[(1, 0)], 1.0);
        assert_eq!(t.values[(3, 1)], 3.0);
    }

    #[test]
    fn malformed_files() {
        assert!(parse("time,a\n1,2\n", MissingPolicy::Reject).is_err());
        assert!(parse("timestamp,a,b\n1,1.0\n", MissingPolicy::Reject).is_err());
        assert!(parse("timestamp,a,b\n1,1.0,x\n", MissingPolicy::Reject).is_err());
        assert!(parse("timestamp,a,b\n1,1.0,NaN\n", MissingPolicy::Reject).is_err());
        assert!(parse("timestamp,a,b\n2,1,1\n1,1,1\n3,1,1\n", MissingPolicy::Reject).is_err());
    }
}
