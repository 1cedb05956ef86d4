//! Price loading, validation and date alignment.
//!
//! Series come from CSV files (one asset per file) or from an HTTP endpoint
//! that returns the same CSV layout or a `{timestamps, closes}` JSON body.
//! Alignment keeps only the dates every series has; nothing is interpolated.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Column names used to read and write price CSVs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub date_column: String,
    pub price_column: String,
    /// Skip rows whose price cell is the literal `null` (vendor holiday rows).
    pub skip_null: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_column: "Date".to_string(),
            price_column: "Adj Close".to_string(),
            skip_null: true,
        }
    }
}

impl CsvSchema {
    pub fn new(date_column: &str, price_column: &str) -> Self {
        Self {
            date_column: date_column.to_string(),
            price_column: price_column.to_string(),
            ..Self::default()
        }
    }
}

/// Dated positive prices for one asset, strictly increasing in date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub asset_id: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Validates ordering, positivity and length.
    pub fn new(asset_id: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if observations.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: observations.len(),
            });
        }
        for (k, &(date, price)) in observations.iter().enumerate() {
            if !(price > 0.0) || !price.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "price {price} on {date} is not a positive finite number"
                )));
            }
            if k > 0 && observations[k - 1].0 >= date {
                return Err(Error::InvalidInput(format!(
                    "dates must be strictly increasing, {} then {date}",
                    observations[k - 1].0
                )));
            }
        }
        Ok(Self {
            asset_id: asset_id.into(),
            observations,
        })
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].0
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].0
    }
}

/// Prices of N assets on the T dates they all share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPanel {
    pub asset_ids: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// One column per asset, each of length T.
    pub columns: Vec<Vec<f64>>,
}

impl AlignedPanel {
    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn price(&self, t: usize, asset: usize) -> f64 {
        self.columns[asset][t]
    }
}

/// Reads one asset's prices from a CSV file. The asset id is the file stem.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let asset_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, &asset_id, schema).map_err(|e| match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.display().to_string()),
        e => e,
    })
}

/// Parses price CSV text. Line numbers in errors count the header as line 1.
pub fn parse_csv<R: Read>(reader: R, asset_id: &str, schema: &CsvSchema) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(Error::EmptyFile(asset_id.to_string())),
        Err(e) => return Err(e.into()),
    };
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let date_idx = find(&schema.date_column)?;
    let price_idx = find(&schema.price_column)?;

    let mut rows: Vec<(NaiveDate, f64, usize)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::MalformedRow {
                line,
                reason: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let (Some(date_s), Some(price_s)) = (record.get(date_idx), record.get(price_idx)) else {
            return Err(Error::MalformedRow {
                line,
                reason: "missing field".to_string(),
            });
        };
        if schema.skip_null && price_s == "null" {
            continue;
        }
        let date = NaiveDate::parse_from_str(date_s, DATE_FORMAT).map_err(|e| {
            Error::MalformedRow {
                line,
                reason: format!("date '{date_s}': {e}"),
            }
        })?;
        let price: f64 = price_s.parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("price '{price_s}' is not a number"),
        })?;
        if !price.is_finite() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("price '{price_s}' is not finite"),
            });
        }
        if price <= 0.0 {
            return Err(Error::NonPositivePrice { line });
        }
        rows.push((date, price, line));
    }

    if rows.is_empty() {
        return Err(Error::EmptyFile(asset_id.to_string()));
    }
    // stable sort keeps file order among equal dates, so the later line is reported
    rows.sort_by_key(|r| r.0);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateDate {
                line: w[0].2.max(w[1].2),
                date: w[1].0,
            });
        }
    }
    PriceSeries::new(
        asset_id,
        rows.into_iter().map(|(d, p, _)| (d, p)).collect(),
    )
}

/// Writes a series in the layout [`parse_csv`] reads. Prices use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(series: &PriceSeries, schema: &CsvSchema, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([&schema.date_column, &schema.price_column])?;
    for (date, price) in series.observations() {
        wtr.write_record([date.format(DATE_FORMAT).to_string(), price.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(series: &PriceSeries, schema: &CsvSchema, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(series, schema, std::io::BufWriter::new(file))
}

/// Intersects the date sets of all series. Column order follows input order.
pub fn align(series: &[PriceSeries]) -> Result<AlignedPanel> {
    if series.is_empty() {
        return Err(Error::InvalidInput("no input series".to_string()));
    }
    let mut seen = HashSet::new();
    for s in series {
        if !seen.insert(s.asset_id.as_str()) {
            return Err(Error::DuplicateAssetId(s.asset_id.clone()));
        }
    }

    let mut common: BTreeSet<NaiveDate> = series[0].observations().iter().map(|o| o.0).collect();
    for s in &series[1..] {
        let dates: HashSet<NaiveDate> = s.observations().iter().map(|o| o.0).collect();
        common.retain(|d| dates.contains(d));
    }
    if common.len() < 3 {
        return Err(Error::InsufficientOverlap {
            common: common.len(),
        });
    }

    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let columns = series
        .iter()
        .map(|s| {
            // both sides sorted: merge walk
            let obs = s.observations();
            let mut k = 0;
            dates
                .iter()
                .map(|d| {
                    while obs[k].0 < *d {
                        k += 1;
                    }
                    obs[k].1
                })
                .collect()
        })
        .collect();

    Ok(AlignedPanel {
        asset_ids: series.iter().map(|s| s.asset_id.clone()).collect(),
        dates,
        columns,
    })
}

/// Payload shape accepted from JSON endpoints. Timestamps are Unix seconds.
#[derive(Debug, Deserialize)]
struct JsonPayload {
    timestamps: Vec<i64>,
    closes: Vec<Option<f64>>,
}

/// Parses a raw endpoint payload, either CSV or `{timestamps, closes}` JSON.
pub fn parse_payload(bytes: &[u8], asset_id: &str, schema: &CsvSchema) -> Result<PriceSeries> {
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if first != Some(&b'{') {
        return parse_csv(bytes, asset_id, schema);
    }

    let payload: JsonPayload =
        serde_json::from_slice(bytes).map_err(|e| Error::PayloadParse(e.to_string()))?;
    if payload.timestamps.len() != payload.closes.len() {
        return Err(Error::PayloadParse(format!(
            "{} timestamps but {} closes",
            payload.timestamps.len(),
            payload.closes.len()
        )));
    }
    let mut obs = Vec::with_capacity(payload.closes.len());
    for (i, (&ts, close)) in payload.timestamps.iter().zip(&payload.closes).enumerate() {
        let close = close.ok_or_else(|| Error::PayloadParse(format!("null close at index {i}")))?;
        if !(close > 0.0) || !close.is_finite() {
            return Err(Error::PayloadParse(format!(
                "non-positive close {close} at index {i}"
            )));
        }
        let date = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| Error::PayloadParse(format!("bad timestamp {ts} at index {i}")))?
            .date_naive();
        obs.push((date, close));
    }
    if obs.is_empty() {
        return Err(Error::PayloadParse("empty payload".to_string()));
    }
    obs.sort_by_key(|o| o.0);
    if let Some(w) = obs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::PayloadParse(format!("duplicate date {}", w[1].0)));
    }
    PriceSeries::new(asset_id, obs)
}

/// An HTTP price source described by a URL template.
///
/// The template may contain `{asset}`, `{start}`, `{end}` (ISO dates) and
/// `{start_ts}`, `{end_ts}` (Unix seconds at midnight UTC).
#[derive(Debug, Clone)]
pub struct RemoteSource {
    pub endpoint: String,
    pub schema: CsvSchema,
    pub cache_dir: Option<PathBuf>,
    pub timeout: Duration,
}

impl RemoteSource {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            schema: CsvSchema::default(),
            cache_dir: None,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn with_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn with_schema(mut self, schema: CsvSchema) -> Self {
        self.schema = schema;
        self
    }

    pub fn url_for(&self, asset_id: &str, start: NaiveDate, end: NaiveDate) -> String {
        let ts = |d: NaiveDate| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp();
        let asset: String = url_escape(asset_id);
        self.endpoint
            .replace("{asset}", &asset)
            .replace("{start_ts}", &ts(start).to_string())
            .replace("{end_ts}", &ts(end).to_string())
            .replace("{start}", &start.format(DATE_FORMAT).to_string())
            .replace("{end}", &end.format(DATE_FORMAT).to_string())
    }

    /// Cache file for one request: `{asset}_{start}_{end}.csv` holding the raw payload.
    pub fn cache_path(&self, asset_id: &str, start: NaiveDate, end: NaiveDate) -> Option<PathBuf> {
        let safe: String = asset_id
            .chars()
            .map(|c| if c == '/' || c == '\\' { '_' } else { c })
            .collect();
        self.cache_dir.as_ref().map(|dir| {
            dir.join(format!(
                "{safe}_{}_{}.csv",
                start.format(DATE_FORMAT),
                end.format(DATE_FORMAT)
            ))
        })
    }

    /// Fetches (or reads from cache) and validates one asset's prices.
    pub fn fetch(&self, asset_id: &str, start: NaiveDate, end: NaiveDate) -> Result<PriceSeries> {
        let cache = self.cache_path(asset_id, start, end);
        if let Some(path) = cache.as_ref().filter(|p| p.is_file()) {
            log::debug!("cache hit {}", path.display());
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            return parse_payload(&bytes, asset_id, &self.schema);
        }

        let url = self.url_for(asset_id, start, end);
        log::info!("fetching {url}");
        let bytes = http_get(&url, self.timeout)?;
        let series = parse_payload(&bytes, asset_id, &self.schema)?;
        if let Some(path) = cache {
            write_atomic(&path, &bytes)?;
        }
        Ok(series)
    }
}

/// One-shot fetch with default schema and no cache.
pub fn fetch_remote(
    endpoint: &str,
    asset_id: &str,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<PriceSeries> {
    RemoteSource::new(endpoint).fetch(asset_id, start, end)
}

fn http_get(url: &str, timeout: Duration) -> Result<Vec<u8>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .build()
        .into();
    match agent
        .get(url)
        .header("User-Agent", concat!("infonet/", env!("CARGO_PKG_VERSION")))
        .call()
    {
        Ok(mut resp) => resp
            .body_mut()
            .read_to_vec()
            .map_err(|e| Error::Network(e.to_string())),
        Err(ureq::Error::StatusCode(code)) => Err(Error::HttpStatus(code)),
        Err(e) => Err(Error::Network(e.to_string())),
    }
}

// Readers only ever see complete files: write to a unique temp name, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension(format!(
        "tmp.{}.{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn url_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~=".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}
