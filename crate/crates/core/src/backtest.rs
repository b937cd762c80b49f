//! Single buy-and-hold evaluation: buy at the first close of the test
//! window, value at the last close. Fractional shares, no costs.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::format::{fmt_fixed, fmt_pct};
use crate::market_data::PricePanel;
use crate::portfolio::WeightVector;

/// How capital is split across the portfolio's tickers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMode {
    /// `weight_i * capital` per ticker.
    Simplex,
    /// `capital / nominal_count` per ticker regardless of weights. With
    /// nine tickers and a nominal count of ten, 90% of capital is deployed.
    FixedAmount { nominal_count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub ticker: String,
    pub weight: f64,
    pub amount_invested: f64,
    pub shares: f64,
    pub buy_price: f64,
    pub sell_price: f64,
    pub terminal_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub allocations: Vec<Allocation>,
    /// Capital actually deployed (sum of amounts invested).
    pub initial_capital: f64,
    pub terminal_capital: f64,
    pub holding_return: f64,
}

fn price_for(prices: &BTreeMap<String, f64>, ticker: &str, side: &str) -> Result<f64> {
    let p = *prices
        .get(ticker)
        .ok_or_else(|| Error::Alignment(format!("no {side} price for {ticker}")))?;
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!(
            "{side} price for {ticker} must be positive, got {p}"
        )));
    }
    Ok(p)
}

pub fn run_backtest(
    w: &WeightVector,
    buy_prices: &BTreeMap<String, f64>,
    sell_prices: &BTreeMap<String, f64>,
    capital: f64,
    mode: AllocationMode,
) -> Result<BacktestReport> {
    if !(capital.is_finite() && capital > 0.0) {
        return Err(Error::Domain(format!(
            "capital must be positive, got {capital}"
        )));
    }
    let per_stock = match mode {
        AllocationMode::Simplex => None,
        AllocationMode::FixedAmount { nominal_count } => {
            if nominal_count < w.len() {
                return Err(Error::Domain(format!(
                    "nominal universe size {nominal_count} is smaller than the {} tickers held",
                    w.len()
                )));
            }
            Some(capital / nominal_count as f64)
        }
    };
    let mut allocations = Vec::with_capacity(w.len());
    for (ticker, weight) in w.tickers().iter().zip(w.weights()) {
        let buy = price_for(buy_prices, ticker, "buy")?;
        let sell = price_for(sell_prices, ticker, "sell")?;
        let amount = per_stock.unwrap_or(weight * capital);
        let shares = amount / buy;
        allocations.push(Allocation {
            ticker: ticker.clone(),
            weight: amount / capital,
            amount_invested: amount,
            shares,
            buy_price: buy,
            sell_price: sell,
            terminal_value: shares * sell,
        });
    }
    let initial_capital: f64 = allocations.iter().map(|a| a.amount_invested).sum();
    let terminal_capital: f64 = allocations.iter().map(|a| a.terminal_value).sum();
    Ok(BacktestReport {
        allocations,
        initial_capital,
        terminal_capital,
        holding_return: terminal_capital / initial_capital - 1.0,
    })
}

/// Buys at the panel's first closes and sells at its last closes.
pub fn backtest_from_panel(
    w: &WeightVector,
    test_panel: &PricePanel,
    capital: f64,
    mode: AllocationMode,
) -> Result<BacktestReport> {
    if test_panel.n_dates() == 0 {
        return Err(Error::EmptyPanel);
    }
    if test_panel.n_dates() < 2 {
        return Err(Error::InsufficientData {
            what: "backtest (test dates)",
            needed: 2,
            got: test_panel.n_dates(),
        });
    }
    let buy = test_panel.first_closes()?;
    let sell = test_panel.last_closes()?;
    run_backtest(w, &buy, &sell, capital, mode)
}

pub const BACKTEST_HEADER: [&str; 8] = [
    "ticker",
    "weight",
    "buy_price",
    "amount_invested",
    "shares",
    "sell_price",
    "terminal_value",
    "return_pct",
];

const TOTAL_LABEL: &str = "TOTAL";

/// Table layout: one row per stock, then a `TOTAL` row carrying the
/// invested and terminal capital and the holding return in percent.
pub fn write_backtest_csv<W: Write>(report: &BacktestReport, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(BACKTEST_HEADER)?;
    for a in &report.allocations {
        wtr.write_record([
            a.ticker.clone(),
            fmt_fixed(a.weight, 6),
            fmt_fixed(a.buy_price, 2),
            fmt_fixed(a.amount_invested, 2),
            fmt_fixed(a.shares, 2),
            fmt_fixed(a.sell_price, 2),
            fmt_fixed(a.terminal_value, 2),
            String::new(),
        ])?;
    }
    let weight_sum: f64 = report.allocations.iter().map(|a| a.weight).sum();
    wtr.write_record([
        TOTAL_LABEL.to_string(),
        fmt_fixed(weight_sum, 6),
        String::new(),
        fmt_fixed(report.initial_capital, 2),
        String::new(),
        String::new(),
        fmt_fixed(report.terminal_capital, 2),
        fmt_pct(report.holding_return),
    ])?;
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads back a file written by [`write_backtest_csv`]. Values carry the
/// file's rounding.
pub fn read_backtest_csv<R: Read>(input: R) -> Result<BacktestReport> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(BACKTEST_HEADER) {
        return Err(Error::format(1, "not a backtest file"));
    }
    let mut allocations = Vec::new();
    let mut total = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse()
                .map_err(|_| Error::format(line, format!("bad number {:?}", &rec[k])))
        };
        if &rec[0] == TOTAL_LABEL {
            total = Some((num(3)?, num(6)?, num(7)? / 100.0));
            continue;
        }
        allocations.push(Allocation {
            ticker: rec[0].to_string(),
            weight: num(1)?,
            buy_price: num(2)?,
            amount_invested: num(3)?,
            shares: num(4)?,
            sell_price: num(5)?,
            terminal_value: num(6)?,
        });
    }
    let (initial_capital, terminal_capital, holding_return) =
        total.ok_or_else(|| Error::format(0, "missing TOTAL row"))?;
    Ok(BacktestReport {
        allocations,
        initial_capital,
        terminal_capital,
        holding_return,
    })
}
