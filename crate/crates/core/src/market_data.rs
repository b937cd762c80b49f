//! Close-price ingestion, date alignment and the missing-data policy.
//!
//! Two CSV layouts are accepted:
//!
//! * long: header `date,ticker,close`, one observation per row;
//! * wide: header `date,<TICKER1>,<TICKER2>,...`, an empty cell marks a
//!   missing observation.
//!
//! Dates are ISO-8601 (`YYYY-MM-DD`). Prices must be positive and finite.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Share of missing observations above which a ticker is dropped.
pub const DEFAULT_MISSING_THRESHOLD: f64 = 0.30;

const DATE_FORMAT: &str = "%Y-%m-%d";

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).ok()
}

/// Inclusive calendar date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::Domain(format!(
                "date range ends ({end}) before it starts ({start})"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for DateRange {
    type Err = Error;

    /// Parses `YYYY-MM-DD:YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Domain(format!("expected <start:end>, got {s:?}")))?;
        let start = parse_date(a).ok_or_else(|| Error::Domain(format!("bad start date {a:?}")))?;
        let end = parse_date(b).ok_or_else(|| Error::Domain(format!("bad end date {b:?}")))?;
        DateRange::new(start, end)
    }
}

/// Daily close prices of one ticker, dates strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let ticker = ticker.into();
        for pair in observations.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Domain(format!(
                    "{ticker}: dates must be strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some((date, price)) = observations
            .iter()
            .find(|(_, p)| !(p.is_finite() && *p > 0.0))
        {
            return Err(Error::Domain(format!(
                "{ticker}: close on {date} must be positive and finite, got {price}"
            )));
        }
        Ok(Self {
            ticker,
            observations,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
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
}

/// One sector's stock universe and its train/test windows.
///
/// Stored as TOML:
///
/// ```toml
/// sector = "Auto"
/// tickers = ["M&M", "MARUTI"]
/// train = { start = "2017-01-01", end = "2021-12-31" }
/// test = { start = "2022-01-01", end = "2022-12-31" }
///
/// [index_weights]   # optional, informational only
/// "M&M" = 20.08
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniverseConfig {
    pub sector: String,
    pub tickers: Vec<String>,
    pub train: DateRange,
    pub test: DateRange,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub index_weights: BTreeMap<String, f64>,
}

impl UniverseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tickers.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        let mut seen = HashSet::new();
        for t in &self.tickers {
            if !seen.insert(t.as_str()) {
                return Err(Error::Config(format!("duplicate ticker {t}")));
            }
        }
        if self.train.end >= self.test.start {
            return Err(Error::Config(format!(
                "training window {} must end before test window {} begins",
                self.train, self.test
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: UniverseConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("universe config is always serializable")
    }
}

/// Every observation found in a price file, keyed by ticker then date.
#[derive(Debug, Clone, Default)]
pub struct PriceTable {
    series: BTreeMap<String, BTreeMap<NaiveDate, f64>>,
}

enum Layout {
    Long,
    Wide(Vec<String>),
}

fn parse_price(raw: &str, line: usize) -> Result<f64> {
    let price: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::format(line, format!("unparseable close {raw:?}")))?;
    if !(price.is_finite() && price > 0.0) {
        return Err(Error::format(
            line,
            format!("close must be positive and finite, got {raw:?}"),
        ));
    }
    Ok(price)
}

impl PriceTable {
    /// Parses either CSV layout, detected from the header row.
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(Error::format(1, "empty price file")),
        };
        let cols: Vec<String> = header.iter().map(|c| c.trim().to_string()).collect();
        let lower: Vec<String> = cols.iter().map(|c| c.to_ascii_lowercase()).collect();
        let layout = if lower == ["date", "ticker", "close"] {
            Layout::Long
        } else if lower.len() >= 2 && lower[0] == "date" {
            let tickers = cols[1..].to_vec();
            let mut seen = HashSet::new();
            for t in &tickers {
                if t.is_empty() {
                    return Err(Error::format(1, "empty ticker column name"));
                }
                if !seen.insert(t.as_str()) {
                    return Err(Error::format(1, format!("duplicate ticker column {t}")));
                }
            }
            Layout::Wide(tickers)
        } else {
            return Err(Error::format(
                1,
                "header must be `date,ticker,close` or `date,<TICKER>,...`",
            ));
        };

        let mut table = PriceTable::default();
        if let Layout::Wide(tickers) = &layout {
            for t in tickers {
                table.series.entry(t.clone()).or_default();
            }
        }
        let mut seen_dates = HashSet::new();
        for rec in records {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.iter().all(|c| c.trim().is_empty()) {
                continue;
            }
            let date = parse_date(&rec[0])
                .ok_or_else(|| Error::format(line, format!("unparseable date {:?}", &rec[0])))?;
            match &layout {
                Layout::Long => {
                    if rec.len() != 3 {
                        return Err(Error::format(
                            line,
                            format!("expected 3 fields, found {}", rec.len()),
                        ));
                    }
                    let ticker = rec[1].trim();
                    if ticker.is_empty() {
                        return Err(Error::format(line, "empty ticker"));
                    }
                    if rec[2].trim().is_empty() {
                        continue;
                    }
                    let price = parse_price(&rec[2], line)?;
                    let entry = table.series.entry(ticker.to_string()).or_default();
                    if entry.insert(date, price).is_some() {
                        return Err(Error::format(
                            line,
                            format!("duplicate observation for {ticker} on {date}"),
                        ));
                    }
                }
                Layout::Wide(tickers) => {
                    if rec.len() != tickers.len() + 1 {
                        return Err(Error::format(
                            line,
                            format!("expected {} fields, found {}", tickers.len() + 1, rec.len()),
                        ));
                    }
                    if !seen_dates.insert(date) {
                        return Err(Error::format(line, format!("duplicate date {date}")));
                    }
                    for (ticker, cell) in tickers.iter().zip(rec.iter().skip(1)) {
                        if cell.trim().is_empty() {
                            continue;
                        }
                        let price = parse_price(cell, line)?;
                        table
                            .series
                            .get_mut(ticker)
                            .expect("wide columns registered from header")
                            .insert(date, price);
                    }
                }
            }
        }
        Ok(table)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(file)
    }

    pub fn tickers(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    pub fn series(&self, ticker: &str) -> Option<PriceSeries> {
        let obs = self.series.get(ticker)?;
        Some(PriceSeries {
            ticker: ticker.to_string(),
            observations: obs.iter().map(|(d, p)| (*d, *p)).collect(),
        })
    }

    /// Aligns the universe's tickers over `window`.
    ///
    /// The date axis is the union of in-window dates on which at least one
    /// universe ticker traded. Cells with no observation stay empty and are
    /// counted in the panel's gap vector.
    pub fn panel(&self, tickers: &[String], window: DateRange) -> Result<PricePanel> {
        if tickers.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        let missing: Vec<String> = tickers
            .iter()
            .filter(|t| !self.series.contains_key(t.as_str()))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingTickers(missing));
        }
        let dates: Vec<NaiveDate> = tickers
            .iter()
            .flat_map(|t| {
                self.series[t.as_str()]
                    .range(window.start..=window.end)
                    .map(|(d, _)| *d)
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if dates.is_empty() {
            return Err(Error::EmptyPanel);
        }
        let closes: Vec<Vec<Option<f64>>> = tickers
            .iter()
            .map(|t| {
                let obs = &self.series[t.as_str()];
                dates.iter().map(|d| obs.get(d).copied()).collect()
            })
            .collect();
        PricePanel::with_gaps(tickers.to_vec(), dates, closes)
    }
}

/// Date-aligned close prices, one row per ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    closes: Vec<Vec<Option<f64>>>,
    gaps: Vec<usize>,
}

impl PricePanel {
    /// Builds a gap-free panel. `closes[i][j]` is ticker `i` on date `j`.
    pub fn from_columns(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        closes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let closes = closes
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect();
        Self::with_gaps(tickers, dates, closes)
    }

    /// Builds a panel that may contain missing cells.
    pub fn with_gaps(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        closes: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &tickers {
            if !seen.insert(t.as_str()) {
                return Err(Error::Domain(format!("duplicate ticker {t} in panel")));
            }
        }
        if closes.len() != tickers.len() {
            return Err(Error::Alignment(format!(
                "{} price rows for {} tickers",
                closes.len(),
                tickers.len()
            )));
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Domain(format!(
                    "panel dates must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        let mut gaps = Vec::with_capacity(tickers.len());
        for (t, row) in tickers.iter().zip(&closes) {
            if row.len() != dates.len() {
                return Err(Error::Alignment(format!(
                    "{t}: {} prices for {} dates",
                    row.len(),
                    dates.len()
                )));
            }
            if let Some(p) = row.iter().flatten().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::Domain(format!(
                    "{t}: close must be positive and finite, got {p}"
                )));
            }
            gaps.push(row.iter().filter(|c| c.is_none()).count());
        }
        Ok(Self {
            tickers,
            dates,
            closes,
            gaps,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    /// Per-ticker count of dates without an observation.
    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    pub fn is_complete(&self) -> bool {
        self.gaps.iter().all(|g| *g == 0)
    }

    pub fn close(&self, ticker: usize, date: usize) -> Option<f64> {
        self.closes[ticker][date]
    }

    pub fn index_of(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    /// Close prices of one ticker; fails if that row still has gaps.
    pub fn column(&self, ticker: usize) -> Result<Vec<f64>> {
        self.closes[ticker]
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::IncompletePanel(self.tickers[ticker].clone()))
    }

    /// Observed (non-missing) prices of one ticker as a series.
    pub fn series(&self, ticker: usize) -> PriceSeries {
        PriceSeries {
            ticker: self.tickers[ticker].clone(),
            observations: self
                .dates
                .iter()
                .zip(&self.closes[ticker])
                .filter_map(|(d, c)| c.map(|p| (*d, p)))
                .collect(),
        }
    }

    fn require_complete(&self) -> Result<()> {
        match self.gaps.iter().position(|g| *g > 0) {
            Some(i) => Err(Error::IncompletePanel(self.tickers[i].clone())),
            None => Ok(()),
        }
    }

    /// Closes on the first date, keyed by ticker.
    pub fn first_closes(&self) -> Result<BTreeMap<String, f64>> {
        self.closes_at(0)
    }

    /// Closes on the last date, keyed by ticker.
    pub fn last_closes(&self) -> Result<BTreeMap<String, f64>> {
        match self.dates.len() {
            0 => Err(Error::EmptyPanel),
            n => self.closes_at(n - 1),
        }
    }

    fn closes_at(&self, date: usize) -> Result<BTreeMap<String, f64>> {
        if self.dates.is_empty() {
            return Err(Error::EmptyPanel);
        }
        self.require_complete()?;
        Ok(self
            .tickers
            .iter()
            .zip(&self.closes)
            .map(|(t, row)| (t.clone(), row[date].expect("complete panel")))
            .collect())
    }

    fn without(&self, drop: &HashSet<usize>) -> Self {
        let keep = |i: &usize| !drop.contains(i);
        Self {
            tickers: (0..self.tickers.len())
                .filter(keep)
                .map(|i| self.tickers[i].clone())
                .collect(),
            dates: self.dates.clone(),
            closes: (0..self.tickers.len())
                .filter(keep)
                .map(|i| self.closes[i].clone())
                .collect(),
            gaps: (0..self.tickers.len())
                .filter(keep)
                .map(|i| self.gaps[i])
                .collect(),
        }
    }
}

/// A ticker removed by the missing-data policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub ticker: String,
    pub missing_fraction: f64,
}

/// Reads `path` and aligns the universe over `window`.
pub fn load_price_panel(
    path: impl AsRef<Path>,
    universe: &UniverseConfig,
    window: DateRange,
) -> Result<PricePanel> {
    PriceTable::read_path(path)?.panel(&universe.tickers, window)
}

/// Same as [`load_price_panel`] for an in-memory or streamed source.
pub fn load_price_panel_from_reader<R: Read>(
    reader: R,
    universe: &UniverseConfig,
    window: DateRange,
) -> Result<PricePanel> {
    PriceTable::parse(reader)?.panel(&universe.tickers, window)
}

/// Drops tickers whose missing share exceeds `threshold`, then fills the
/// remaining gaps: forward with the last observed close, and backward from
/// the first observation for a leading gap.
pub fn apply_missing_data_policy(
    panel: &PricePanel,
    threshold: f64,
) -> Result<(PricePanel, Vec<Exclusion>)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Domain(format!(
            "missing-data threshold must lie in [0, 1], got {threshold}"
        )));
    }
    let n_dates = panel.n_dates();
    if n_dates == 0 {
        return Err(Error::EmptyPanel);
    }
    let mut excluded = Vec::new();
    let mut drop = HashSet::new();
    for (i, (ticker, gaps)) in panel.tickers.iter().zip(&panel.gaps).enumerate() {
        let missing_fraction = *gaps as f64 / n_dates as f64;
        // Strictly greater: exactly-at-threshold is retained.
        if missing_fraction > threshold || *gaps == n_dates {
            drop.insert(i);
            excluded.push(Exclusion {
                ticker: ticker.clone(),
                missing_fraction,
            });
        }
    }
    if drop.len() == panel.n_tickers() {
        return Err(Error::EmptyUniverse);
    }
    let mut filled = panel.without(&drop);
    for row in &mut filled.closes {
        fill_row(row);
    }
    filled.gaps.iter_mut().for_each(|g| *g = 0);
    Ok((filled, excluded))
}

fn fill_row(row: &mut [Option<f64>]) {
    let Some(first) = row.iter().flatten().next().copied() else {
        return;
    };
    let mut last = first;
    for cell in row.iter_mut() {
        match cell {
            Some(p) => last = *p,
            None => *cell = Some(last),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn universe(tickers: &[&str]) -> UniverseConfig {
        UniverseConfig {
            sector: "Test".into(),
            tickers: tickers.iter().map(|t| t.to_string()).collect(),
            train: "2020-01-01:2020-12-31".parse().unwrap(),
            test: "2021-01-01:2021-12-31".parse().unwrap(),
            index_weights: BTreeMap::new(),
        }
    }

    const LONG: &str = "date,ticker,close\n\
        2020-01-02,A,10\n2020-01-02,B,20\n\
        2020-01-03,A,11\n2020-01-03,B,21\n\
        2020-01-06,A,12\n2020-01-06,B,22\n";

    #[test]
    fn long_layout_two_by_three() {
        let u = universe(&["A", "B"]);
        let p = load_price_panel_from_reader(LONG.as_bytes(), &u, u.train).unwrap();
        assert_eq!(p.n_tickers(), 2);
        assert_eq!(p.n_dates(), 3);
        assert!(p.is_complete());
        assert_eq!(p.column(1).unwrap(), vec![20.0, 21.0, 22.0]);
    }

    #[test]
    fn wide_layout_records_gaps() {
        let csv = "date,A,B\n2020-01-02,10,\n2020-01-03,11,21\n2020-01-06,,22\n";
        let u = universe(&["A", "B"]);
        let p = load_price_panel_from_reader(csv.as_bytes(), &u, u.train).unwrap();
        assert_eq!(p.gaps(), &[1, 1]);
        assert!(p.column(0).is_err());
    }

    #[test]
    fn missing_ticker_is_named() {
        let u = universe(&["A", "B", "C"]);
        match load_price_panel_from_reader(LONG.as_bytes(), &u, u.train) {
            Err(Error::MissingTickers(t)) => assert_eq!(t, vec!["C".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn window_outside_data_is_empty_panel() {
        let u = universe(&["A", "B"]);
        let err = load_price_panel_from_reader(LONG.as_bytes(), &u, u.test).unwrap_err();
        assert!(matches!(err, Error::EmptyPanel));
    }

    #[test]
    fn window_restricts_rows() {
        let u = universe(&["A"]);
        let w = "2020-01-03:2020-01-03".parse().unwrap();
        let p = load_price_panel_from_reader(LONG.as_bytes(), &u, w).unwrap();
        assert_eq!(p.dates(), &[d("2020-01-03")]);
    }

    #[test]
    fn format_errors_name_the_line() {
        let bad = "date,ticker,close\n2020-01-02,A,10\n2020-13-02,A,11\n";
        match PriceTable::parse(bad.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let neg = "date,A\n2020-01-02,-1\n";
        assert!(matches!(
            PriceTable::parse(neg.as_bytes()),
            Err(Error::Format { line: 2, .. })
        ));
        let dup = "date,ticker,close\n2020-01-02,A,10\n2020-01-02,A,11\n";
        assert!(matches!(
            PriceTable::parse(dup.as_bytes()),
            Err(Error::Format { line: 3, .. })
        ));
        assert!(matches!(
            PriceTable::parse("open,high\n".as_bytes()),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn unsorted_long_rows_are_sorted() {
        let csv = "date,ticker,close\n2020-01-03,A,11\n2020-01-02,A,10\n";
        let t = PriceTable::parse(csv.as_bytes()).unwrap();
        let s = t.series("A").unwrap();
        assert_eq!(s.observations()[0], (d("2020-01-02"), 10.0));
    }

    #[test]
    fn policy_is_identity_without_gaps() {
        let u = universe(&["A", "B"]);
        let p = load_price_panel_from_reader(LONG.as_bytes(), &u, u.train).unwrap();
        let (q, ex) = apply_missing_data_policy(&p, DEFAULT_MISSING_THRESHOLD).unwrap();
        assert_eq!(q, p);
        assert!(ex.is_empty());
    }

    fn gapped_panel(missing: usize, total: usize) -> PricePanel {
        let dates: Vec<NaiveDate> = (0..total)
            .map(|i| d("2020-01-01") + chrono::Duration::days(i as i64))
            .collect();
        let full: Vec<Option<f64>> = (0..total).map(|i| Some(100.0 + i as f64)).collect();
        let mut late = full.clone();
        for c in late.iter_mut().take(missing) {
            *c = None;
        }
        PricePanel::with_gaps(vec!["FULL".into(), "LATE".into()], dates, vec![full, late]).unwrap()
    }

    #[test]
    fn exactly_threshold_is_retained_and_filled() {
        let p = gapped_panel(3, 10);
        let (q, ex) = apply_missing_data_policy(&p, 0.30).unwrap();
        assert!(ex.is_empty());
        assert!(q.is_complete());
        // leading gap back-filled from the first observation
        assert_eq!(q.column(1).unwrap()[..4], [103.0, 103.0, 103.0, 103.0]);
    }

    #[test]
    fn late_listing_is_excluded() {
        let p = gapped_panel(85, 100);
        let (q, ex) = apply_missing_data_policy(&p, 0.30).unwrap();
        assert_eq!(q.tickers(), &["FULL".to_string()]);
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].ticker, "LATE");
        assert!((ex[0].missing_fraction - 0.85).abs() < 1e-12);
    }

    #[test]
    fn all_excluded_is_an_error() {
        let dates = vec![d("2020-01-01"), d("2020-01-02")];
        let p =
            PricePanel::with_gaps(vec!["X".into()], dates, vec![vec![None, Some(1.0)]]).unwrap();
        assert!(matches!(
            apply_missing_data_policy(&p, 0.3),
            Err(Error::EmptyUniverse)
        ));
    }

    #[test]
    fn sporadic_gap_carries_forward() {
        let dates: Vec<NaiveDate> = (1..=5).map(|i| d(&format!("2020-01-0{i}"))).collect();
        let row = vec![Some(1.0), Some(2.0), None, None, Some(5.0)];
        let p = PricePanel::with_gaps(vec!["A".into()], dates, vec![row]).unwrap();
        let (q, _) = apply_missing_data_policy(&p, 0.5).unwrap();
        assert_eq!(q.column(0).unwrap(), vec![1.0, 2.0, 2.0, 2.0, 5.0]);
    }

    #[test]
    fn universe_config_round_trip_and_validation() {
        let u = universe(&["A", "B"]);
        let back = UniverseConfig::from_toml_str(&u.to_toml_string()).unwrap();
        assert_eq!(back, u);

        let mut bad = u.clone();
        bad.test = bad.train;
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        bad = u.clone();
        bad.tickers.clear();
        assert!(matches!(bad.validate(), Err(Error::EmptyUniverse)));
    }

    #[test]
    fn date_range_parsing() {
        let r: DateRange = "2017-01-01:2021-12-31".parse().unwrap();
        assert_eq!(r.to_string(), "2017-01-01:2021-12-31");
        assert!("2021-01-01:2020-01-01".parse::<DateRange>().is_err());
        assert!("2021-01-01".parse::<DateRange>().is_err());
    }

    #[test]
    fn price_series_rejects_bad_input() {
        assert!(
            PriceSeries::new("A", vec![(d("2020-01-02"), 1.0), (d("2020-01-02"), 2.0)]).is_err()
        );
        assert!(PriceSeries::new("A", vec![(d("2020-01-02"), 0.0)]).is_err());
    }
}
