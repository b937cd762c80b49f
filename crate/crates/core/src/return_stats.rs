//! Daily returns, annualized return/volatility and covariance/correlation
//! matrices over a training panel.

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::market_data::{PricePanel, PriceSeries};

/// Trading days per year used for every annualization.
pub const TRADING_DAYS: f64 = 250.0;

/// Simple daily returns of one ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub ticker: String,
    pub returns: Vec<(NaiveDate, f64)>,
}

impl ReturnSeries {
    pub fn values(&self) -> Vec<f64> {
        self.returns.iter().map(|(_, r)| *r).collect()
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Per-ticker training statistics (one row of the stats table).
#[derive(Debug, Clone, PartialEq)]
pub struct AssetStats {
    pub ticker: String,
    pub annual_return: f64,
    pub daily_volatility: f64,
    pub annual_volatility: f64,
}

/// Sample covariance of daily returns. Multiply by [`TRADING_DAYS`] for the
/// annual scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    tickers: Vec<String>,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a precomputed matrix after checking shape and symmetry.
    pub fn new(tickers: Vec<String>, entries: DMatrix<f64>) -> Result<Self> {
        let n = tickers.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::Alignment(format!(
                "{}x{} covariance for {n} tickers",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Domain(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { tickers, entries })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.tickers.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn annualized(&self) -> DMatrix<f64> {
        &self.entries * TRADING_DAYS
    }
}

/// `close_t / close_{t-1} - 1` for consecutive observations.
pub fn daily_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    let obs = series.observations();
    if obs.len() < 2 {
        return Err(Error::InsufficientData {
            what: "daily returns",
            needed: 2,
            got: obs.len(),
        });
    }
    Ok(ReturnSeries {
        ticker: series.ticker().to_string(),
        returns: obs
            .windows(2)
            .map(|w| (w[1].0, w[1].1 / w[0].1 - 1.0))
            .collect(),
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean daily return scaled by [`TRADING_DAYS`].
pub fn annualize_return(r: &ReturnSeries) -> Result<f64> {
    if r.is_empty() {
        return Err(Error::InsufficientData {
            what: "annual return",
            needed: 1,
            got: 0,
        });
    }
    Ok(mean(&r.values()) * TRADING_DAYS)
}

/// Sample (n-1) standard deviation of the daily returns.
pub fn daily_volatility(r: &ReturnSeries) -> Result<f64> {
    let xs = r.values();
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            what: "daily volatility",
            needed: 2,
            got: xs.len(),
        });
    }
    Ok(sample_covariance(&xs, &xs).sqrt())
}

pub fn annual_volatility(daily: f64) -> Result<f64> {
    if daily.is_nan() || daily < 0.0 {
        return Err(Error::Domain(format!(
            "daily volatility must be non-negative, got {daily}"
        )));
    }
    Ok(daily * TRADING_DAYS.sqrt())
}

fn sample_covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    s / (a.len() - 1) as f64
}

fn panel_returns(panel: &PricePanel) -> Result<Vec<Vec<f64>>> {
    (0..panel.n_tickers())
        .map(|i| {
            let closes = panel.column(i)?;
            Ok(closes.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
        })
        .collect()
}

/// Return and volatility for every ticker of a gap-free panel.
pub fn asset_stats(panel: &PricePanel) -> Result<Vec<AssetStats>> {
    if panel.n_dates() < 3 {
        return Err(Error::InsufficientData {
            what: "asset statistics (dates)",
            needed: 3,
            got: panel.n_dates(),
        });
    }
    (0..panel.n_tickers())
        .map(|i| {
            let closes = panel.column(i)?;
            let series = PriceSeries::new(
                panel.tickers()[i].clone(),
                panel.dates().iter().copied().zip(closes).collect(),
            )?;
            let r = daily_returns(&series)?;
            let dv = daily_volatility(&r)?;
            Ok(AssetStats {
                ticker: r.ticker.clone(),
                annual_return: annualize_return(&r)?,
                daily_volatility: dv,
                annual_volatility: annual_volatility(dv)?,
            })
        })
        .collect()
}

/// Pairwise sample covariance of daily returns.
pub fn covariance_matrix(panel: &PricePanel) -> Result<CovarianceMatrix> {
    if panel.n_dates() < 3 {
        return Err(Error::InsufficientData {
            what: "covariance (dates)",
            needed: 3,
            got: panel.n_dates(),
        });
    }
    let returns = panel_returns(panel)?;
    let n = returns.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let c = sample_covariance(&returns[i], &returns[j]);
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    Ok(CovarianceMatrix {
        tickers: panel.tickers().to_vec(),
        entries: m,
    })
}

/// `cov(i,j) / (sigma_i * sigma_j)`, clamped to [-1, 1] with an exact unit
/// diagonal.
pub fn correlation_matrix(cov: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    let n = cov.dim();
    let sd: Vec<f64> = (0..n).map(|i| cov.get(i, i).sqrt()).collect();
    if let Some(i) = sd.iter().position(|s| s.is_nan() || *s <= 0.0) {
        return Err(Error::DegenerateAsset(cov.tickers[i].clone()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (cov.get(i, j) / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        }
    }))
}
