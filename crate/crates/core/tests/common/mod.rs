#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sectorfolio::backtest::{run_backtest, AllocationMode, BacktestReport};
use sectorfolio::market_data::PricePanel;
use sectorfolio::portfolio::WeightVector;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("T{i}")).collect()
}

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Weekdays from `start` (inclusive) up to `end` (inclusive).
pub fn business_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let mut d = start;
    while d <= end {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Correlated random-walk closes: a shared market factor plus an
/// idiosyncratic term with ticker-specific drift and scale.
pub fn synthetic_closes(n_tickers: usize, n_dates: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = (0..n_tickers)
        .map(|i| vec![50.0 + 25.0 * i as f64])
        .collect();
    for _ in 1..n_dates {
        let market: f64 = rng.random_range(-0.01..0.01);
        for (i, col) in cols.iter_mut().enumerate() {
            let beta = 0.5 + 0.1 * i as f64;
            let idio: f64 = rng.random_range(-0.02..0.02) * (1.0 + 0.15 * i as f64);
            let drift = 0.0002 * (i as f64 - 3.0);
            let last = *col.last().unwrap();
            col.push(last * (1.0 + drift + beta * market + idio));
        }
    }
    cols
}

pub fn synthetic_panel(n_tickers: usize, n_dates: usize, seed: u64) -> PricePanel {
    let dates: Vec<NaiveDate> = (0..n_dates)
        .map(|i| ymd(2018, 1, 1) + Duration::days(i as i64))
        .collect();
    PricePanel::from_columns(
        names(n_tickers),
        dates,
        synthetic_closes(n_tickers, n_dates, seed),
    )
    .unwrap()
}

/// Long-layout CSV text for `(ticker, dates, closes)` triples.
pub fn long_csv(series: &[(String, Vec<NaiveDate>, Vec<f64>)]) -> String {
    let mut s = String::from("date,ticker,close\n");
    for (t, dates, closes) in series {
        for (d, c) in dates.iter().zip(closes) {
            writeln!(s, "{d},{t},{c}").unwrap();
        }
    }
    s
}

/// One published buy/sell table, transcribed.
#[derive(Debug, Clone)]
pub struct PrintedBacktest {
    pub table: u32,
    pub sector: String,
    pub portfolio: String,
    pub tickers: Vec<String>,
    pub weights: Vec<f64>,
    pub buy: BTreeMap<String, f64>,
    pub sell: BTreeMap<String, f64>,
}

pub fn printed_backtests() -> Vec<PrintedBacktest> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/printed_backtests.csv");
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let mut out: Vec<PrintedBacktest> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let table: u32 = rec[0].parse().unwrap();
        if out.last().map(|b| b.table) != Some(table) {
            out.push(PrintedBacktest {
                table,
                sector: rec[1].to_string(),
                portfolio: rec[2].to_string(),
                tickers: Vec::new(),
                weights: Vec::new(),
                buy: BTreeMap::new(),
                sell: BTreeMap::new(),
            });
        }
        let b = out.last_mut().unwrap();
        let t = rec[3].to_string();
        b.weights.push(rec[4].parse().unwrap());
        b.buy.insert(t.clone(), rec[5].parse().unwrap());
        b.sell.insert(t.clone(), rec[6].parse().unwrap());
        b.tickers.push(t);
    }
    out
}

impl PrintedBacktest {
    /// Printed equal-weight tables with fewer than ten names keep the 10%
    /// per-stock slot, so they run in fixed-amount mode.
    pub fn mode(&self) -> AllocationMode {
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() < 1e-3 {
            AllocationMode::Simplex
        } else {
            AllocationMode::FixedAmount {
                nominal_count: (1.0 / self.weights[0]).round() as usize,
            }
        }
    }

    pub fn run(&self, capital: f64) -> BacktestReport {
        let w = match self.mode() {
            AllocationMode::Simplex => {
                WeightVector::normalized(self.tickers.clone(), self.weights.clone()).unwrap()
            }
            AllocationMode::FixedAmount { .. } => {
                sectorfolio::portfolio::equal_weights(&self.tickers).unwrap()
            }
        };
        run_backtest(&w, &self.buy, &self.sell, capital, self.mode()).unwrap()
    }
}

/// Published test-year returns (%) per sector:
/// (sector, equal-weight, max-Sharpe).
pub const SUMMARY_TABLE: [(&str, f64, f64); 13] = [
    ("Auto", 23.52, 25.78),
    ("Banking", 34.43, 20.25),
    ("Consumer Durables", -15.74, -20.74),
    ("Financial Services", 5.94, -0.94),
    ("FMCG", 19.10, 30.29),
    ("IT", -32.09, -31.16),
    ("Media", -6.13, -17.84),
    ("Metal", 14.38, 41.97),
    ("Oil & Gas", 5.78, 18.46),
    ("Pharma", -14.72, -16.05),
    ("Public Sector Banks", 67.70, 56.34),
    ("Private Banks", 22.76, 14.31),
    ("Realty", -13.83, -11.40),
];

pub fn summary_pct(sector: &str, portfolio: &str) -> f64 {
    let row = SUMMARY_TABLE.iter().find(|r| r.0 == sector).unwrap();
    if portfolio == "EWP" {
        row.1
    } else {
        row.2
    }
}
