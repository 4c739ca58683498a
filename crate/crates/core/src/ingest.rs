//! Price-history and company-metadata ingestion.
//!
//! ## Price CSV (case-insensitive, order-independent header)
//!
//! | Column   | Example      | Notes                                   |
//! |----------|--------------|-----------------------------------------|
//! | `date`   | `2013-02-08` | ISO-8601 or `YYYY/MM/DD`, nothing else  |
//! | `open`   | `15.07`      | must be > 0                             |
//! | `close`  | `14.75`      | must be > 0                             |
//! | `name`   | `AAL`        | ticker; `ticker`/`symbol` also accepted |
//!
//! `high`, `low` and `volume` are ignored when present.
//!
//! ## Company CSV
//!
//! Columns `symbol`, `name`, `sector`; anything else is ignored.
//!
//! ## Alias CSV
//!
//! Two columns `source_symbol,canonical_symbol`. Tickers are trimmed and
//! uppercased before the alias lookup; no other rewriting is attempted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

/// Cells with an absolute daily change at or above this bound are reported and dropped.
pub const CHANGE_SANITY_BOUND: f64 = 10.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: required column '{0}' is absent")]
    MalformedHeader(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("no valid rows in input")]
    EmptyInput,
    #[error("ticker {ticker} listed twice with conflicting sectors ('{first}' vs '{second}')")]
    DuplicateTicker {
        ticker: String,
        first: String,
        second: String,
    },
    #[error("price and company tables share no ticker")]
    EmptyIntersection,
    #[error("panel cache line {line}: {message}")]
    Cache { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// One cleaned daily bar. Only the fields the pipeline consumes are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceBar {
    pub ticker: String,
    pub date: NaiveDate,
    pub open: f64,
    pub close: f64,
}

impl PriceBar {
    /// Same-day relative move `(close - open) / open`.
    pub fn relative_change(&self) -> f64 {
        (self.close - self.open) / self.open
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanyRecord {
    pub ticker: String,
    pub name: String,
    pub sector: String,
}

/// Counters describing what [`parse_price_csv`] threw away.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PriceParseReport {
    pub rows_read: usize,
    pub missing_fields: usize,
    pub unparseable: usize,
    pub nonpositive: usize,
    pub duplicates: usize,
}

impl PriceParseReport {
    pub fn dropped(&self) -> usize {
        self.missing_fields + self.unparseable + self.nonpositive
    }
}

#[derive(Debug, Clone)]
pub struct PriceTable {
    /// Sorted by (ticker, date); (ticker, date) unique.
    pub bars: Vec<PriceBar>,
    pub report: PriceParseReport,
}

/// A company row that was refused, with the 1-based line it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowRejection {
    pub line: usize,
    pub ticker: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct CompanyTable {
    /// Sorted by ticker; tickers unique.
    pub records: Vec<CompanyRecord>,
    pub rejected: Vec<RowRejection>,
}

impl CompanyTable {
    pub fn sector_of(&self, ticker: &str) -> Option<&str> {
        self.records
            .binary_search_by(|r| r.ticker.as_str().cmp(ticker))
            .ok()
            .map(|i| self.records[i].sector.as_str())
    }
}

/// Explicit symbol rewrites applied after trimming and uppercasing.
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    map: BTreeMap<String, String>,
}

impl AliasMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: &str, canonical: &str) {
        self.map
            .insert(clean_symbol(source), clean_symbol(canonical));
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Trim, uppercase, then apply the alias table.
    pub fn normalize(&self, raw: &str) -> String {
        let cleaned = clean_symbol(raw);
        match self.map.get(&cleaned) {
            Some(canonical) => canonical.clone(),
            None => cleaned,
        }
    }
}

fn clean_symbol(raw: &str) -> String {
    raw.trim().to_uppercase()
}

/// Parse `YYYY-MM-DD` or `YYYY/MM/DD`; every other layout is rejected.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(raw, "%Y/%m/%d"))
        .ok()
}

fn open_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            IngestError::FileNotFound(path.to_path_buf())
        } else {
            IngestError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn header_index(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
}

fn require_column(headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    header_index(headers, names).ok_or_else(|| IngestError::MalformedHeader(names[0].to_string()))
}

fn csv_err(e: csv::Error) -> IngestError {
    IngestError::Csv(e.to_string())
}

pub fn parse_price_csv(path: &Path, aliases: &AliasMap) -> Result<PriceTable> {
    parse_price_reader(open_file(path)?, aliases)
}

/// Reader-based variant of [`parse_price_csv`].
pub fn parse_price_reader<R: Read>(reader: R, aliases: &AliasMap) -> Result<PriceTable> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let date_col = require_column(&headers, &["date"])?;
    let open_col = require_column(&headers, &["open"])?;
    let close_col = require_column(&headers, &["close"])?;
    let name_col = require_column(&headers, &["name", "ticker", "symbol"])?;

    let mut report = PriceParseReport::default();
    let mut by_key: BTreeMap<(String, NaiveDate), PriceBar> = BTreeMap::new();

    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        report.rows_read += 1;
        let field = |i: usize| record.get(i).filter(|s| !s.is_empty());
        let (Some(date), Some(open), Some(close), Some(name)) = (
            field(date_col),
            field(open_col),
            field(close_col),
            field(name_col),
        ) else {
            report.missing_fields += 1;
            continue;
        };
        let (Some(date), Ok(open), Ok(close)) =
            (parse_date(date), open.parse::<f64>(), close.parse::<f64>())
        else {
            report.unparseable += 1;
            continue;
        };
        if !open.is_finite() || !close.is_finite() {
            report.unparseable += 1;
            continue;
        }
        if open <= 0.0 || close <= 0.0 {
            report.nonpositive += 1;
            continue;
        }
        let ticker = aliases.normalize(name);
        if ticker.is_empty() {
            report.missing_fields += 1;
            continue;
        }
        let bar = PriceBar {
            ticker: ticker.clone(),
            date,
            open,
            close,
        };
        if by_key.insert((ticker, date), bar).is_some() {
            report.duplicates += 1;
        }
    }

    if by_key.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(PriceTable {
        bars: by_key.into_values().collect(),
        report,
    })
}

pub fn parse_company_csv(path: &Path, aliases: &AliasMap) -> Result<CompanyTable> {
    parse_company_reader(open_file(path)?, aliases)
}

pub fn parse_company_reader<R: Read>(reader: R, aliases: &AliasMap) -> Result<CompanyTable> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let symbol_col = require_column(&headers, &["symbol", "ticker"])?;
    let name_col = require_column(&headers, &["name"])?;
    let sector_col = require_column(&headers, &["sector"])?;

    let mut records: BTreeMap<String, CompanyRecord> = BTreeMap::new();
    let mut rejected = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        // header is line 1
        let line = i + 2;
        let get = |c: usize| record.get(c).unwrap_or("").trim().to_string();
        let ticker = aliases.normalize(&get(symbol_col));
        let name = get(name_col);
        let sector = get(sector_col);
        if ticker.is_empty() {
            rejected.push(RowRejection {
                line,
                ticker,
                reason: "empty symbol".into(),
            });
            continue;
        }
        if sector.is_empty() {
            rejected.push(RowRejection {
                line,
                ticker,
                reason: "empty sector".into(),
            });
            continue;
        }
        match records.get(&ticker) {
            Some(existing) if existing.sector != sector => {
                return Err(IngestError::DuplicateTicker {
                    ticker,
                    first: existing.sector.clone(),
                    second: sector,
                });
            }
            Some(_) => {}
            None => {
                records.insert(
                    ticker.clone(),
                    CompanyRecord {
                        ticker,
                        name,
                        sector,
                    },
                );
            }
        }
    }
    if records.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(CompanyTable {
        records: records.into_values().collect(),
        rejected,
    })
}

pub fn parse_alias_csv(path: &Path) -> Result<AliasMap> {
    let mut rdr = csv_reader(open_file(path)?);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let src = header_index(&headers, &["source_symbol"]).unwrap_or(0);
    let dst = header_index(&headers, &["canonical_symbol"]).unwrap_or(1);
    let mut map = AliasMap::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        if let (Some(a), Some(b)) = (record.get(src), record.get(dst)) {
            if !a.is_empty() && !b.is_empty() {
                map.insert(a, b);
            }
        }
    }
    Ok(map)
}

/// A cell that violated [`CHANGE_SANITY_BOUND`] and was left missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    pub ticker: String,
    pub date: NaiveDate,
    pub change: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PanelReport {
    pub outliers: Vec<Outlier>,
    /// Tickers with prices but no company record.
    pub unmatched_price_tickers: Vec<String>,
    /// Tickers with a company record but no prices.
    pub unmatched_company_tickers: Vec<String>,
}

/// Daily relative changes, `dates x tickers`, with missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePanel {
    tickers: Vec<String>,
    sectors: Vec<String>,
    dates: Vec<NaiveDate>,
    cells: Vec<Option<f64>>,
    pub report: PanelReport,
}

impl ChangePanel {
    /// Assemble a panel from parts. `cells` is row-major over `dates x tickers`.
    ///
    /// Panics if the shapes disagree.
    pub fn from_parts(
        tickers: Vec<String>,
        sectors: Vec<String>,
        dates: Vec<NaiveDate>,
        cells: Vec<Option<f64>>,
    ) -> Self {
        assert_eq!(tickers.len(), sectors.len());
        assert_eq!(cells.len(), tickers.len() * dates.len());
        Self {
            tickers,
            sectors,
            dates,
            cells,
            report: PanelReport::default(),
        }
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty() || self.tickers.is_empty()
    }

    pub fn change(&self, day: usize, ticker: usize) -> Option<f64> {
        self.cells[day * self.tickers.len() + ticker]
    }

    /// Row of one trading day, indexed by ticker position.
    pub fn day(&self, day: usize) -> &[Option<f64>] {
        let w = self.tickers.len();
        &self.cells[day * w..(day + 1) * w]
    }

    pub fn present_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Long-format cache: `date,ticker,sector,change`, present cells only,
    /// sorted by date then ticker. Values use shortest round-trip formatting.
    pub fn write_cache<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,ticker,sector,change")?;
        for (t, date) in self.dates.iter().enumerate() {
            for (s, ticker) in self.tickers.iter().enumerate() {
                if let Some(v) = self.change(t, s) {
                    writeln!(out, "{date},{ticker},{},{v}", csv_field(&self.sectors[s]))?;
                }
            }
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut sectors: BTreeMap<String, String> = BTreeMap::new();
        let mut rows: Vec<(NaiveDate, String, f64)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            let bad = |message: &str| IngestError::Cache {
                line,
                message: message.to_string(),
            };
            if rec.len() != 4 {
                return Err(bad("expected 4 columns"));
            }
            let date = parse_date(&rec[0]).ok_or_else(|| bad("bad date"))?;
            let value: f64 = rec[3].parse().map_err(|_| bad("bad change value"))?;
            let ticker = rec[1].to_string();
            if let Some(prev) = sectors.insert(ticker.clone(), rec[2].to_string()) {
                if prev != rec[2] {
                    return Err(bad("ticker changes sector"));
                }
            }
            rows.push((date, ticker, value));
        }
        if rows.is_empty() {
            return Err(IngestError::EmptyInput);
        }
        let tickers: Vec<String> = sectors.keys().cloned().collect();
        let dates: Vec<NaiveDate> = rows
            .iter()
            .map(|r| r.0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut cells = vec![None; tickers.len() * dates.len()];
        for (date, ticker, v) in rows {
            let t = dates.binary_search(&date).expect("date collected above");
            let s = tickers.binary_search(&ticker).expect("ticker collected above");
            cells[t * tickers.len() + s] = Some(v);
        }
        Ok(Self::from_parts(
            tickers,
            sectors.into_values().collect(),
            dates,
            cells,
        ))
    }

    pub fn read_cache_file(path: &Path) -> Result<Self> {
        Self::read_cache(BufReader::new(open_file(path)?))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Join prices with company metadata into the daily change panel.
///
/// Tickers are sorted lexicographically and dates ascending. A (ticker, day)
/// without a bar is missing, never zero.
pub fn build_change_panel(prices: &PriceTable, companies: &CompanyTable) -> Result<ChangePanel> {
    let price_tickers: BTreeSet<&str> = prices.bars.iter().map(|b| b.ticker.as_str()).collect();
    let company_tickers: BTreeSet<&str> =
        companies.records.iter().map(|r| r.ticker.as_str()).collect();
    let tickers: Vec<String> = price_tickers
        .intersection(&company_tickers)
        .map(|s| s.to_string())
        .collect();
    if tickers.is_empty() {
        return Err(IngestError::EmptyIntersection);
    }
    let sectors: Vec<String> = tickers
        .iter()
        .map(|t| companies.sector_of(t).expect("ticker in company table").to_string())
        .collect();

    let kept = |b: &&PriceBar| tickers.binary_search(&b.ticker).is_ok();
    let dates: Vec<NaiveDate> = prices
        .bars
        .iter()
        .filter(kept)
        .map(|b| b.date)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut report = PanelReport {
        unmatched_price_tickers: price_tickers
            .difference(&company_tickers)
            .map(|s| s.to_string())
            .collect(),
        unmatched_company_tickers: company_tickers
            .difference(&price_tickers)
            .map(|s| s.to_string())
            .collect(),
        ..PanelReport::default()
    };

    let width = tickers.len();
    let mut cells = vec![None; width * dates.len()];
    for bar in prices.bars.iter().filter(kept) {
        let s = tickers.binary_search(&bar.ticker).expect("kept ticker");
        let t = dates.binary_search(&bar.date).expect("collected date");
        let change = bar.relative_change();
        if !change.is_finite() || change.abs() >= CHANGE_SANITY_BOUND {
            report.outliers.push(Outlier {
                ticker: bar.ticker.clone(),
                date: bar.date,
                change,
            });
            continue;
        }
        cells[t * width + s] = Some(change);
    }

    let mut panel = ChangePanel::from_parts(tickers, sectors, dates, cells);
    panel.report = report;
    Ok(panel)
}

/// Convenience: parse both files (plus optional aliases) and build the panel.
pub fn load_panel(
    price_csv: &Path,
    company_csv: &Path,
    alias_csv: Option<&Path>,
) -> Result<(ChangePanel, PriceParseReport, CompanyTable)> {
    let aliases = match alias_csv {
        Some(p) => parse_alias_csv(p)?,
        None => AliasMap::new(),
    };
    let prices = parse_price_csv(price_csv, &aliases)?;
    let companies = parse_company_csv(company_csv, &aliases)?;
    let panel = build_change_panel(&prices, &companies)?;
    Ok((panel, prices.report, companies))
}
