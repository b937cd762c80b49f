//! Long-only weight vectors, portfolio return/variance and the Sharpe ratio.

use crate::error::{Error, Result};
use crate::return_stats::{AssetStats, CovarianceMatrix, TRADING_DAYS};

/// Tolerance on `sum(weights) == 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Non-negative weights summing to one, tied to a ticker ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    tickers: Vec<String>,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(tickers: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        check_shape(&tickers, &weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { tickers, weights })
    }

    /// Rescales non-negative weights onto the simplex. Useful for weights
    /// printed with limited precision that sum to 0.999998 or similar.
    pub fn normalized(tickers: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        check_shape(&tickers, &weights)?;
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidWeights(format!(
                "cannot normalize weights summing to {sum}"
            )));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { tickers, weights })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, ticker: &str) -> Option<f64> {
        self.tickers
            .iter()
            .position(|t| t == ticker)
            .map(|i| self.weights[i])
    }

    /// Unit weight on ticker `k`.
    pub fn single(tickers: Vec<String>, k: usize) -> Result<Self> {
        if k >= tickers.len() {
            return Err(Error::Alignment(format!(
                "index {k} out of range for {} tickers",
                tickers.len()
            )));
        }
        let mut w = vec![0.0; tickers.len()];
        w[k] = 1.0;
        Self::new(tickers, w)
    }
}

fn check_shape(tickers: &[String], weights: &[f64]) -> Result<()> {
    if tickers.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    if tickers.len() != weights.len() {
        return Err(Error::Alignment(format!(
            "{} weights for {} tickers",
            weights.len(),
            tickers.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeights(format!(
            "weights must be finite and non-negative, got {w}"
        )));
    }
    Ok(())
}

/// Annual expected returns keyed by ticker ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualReturns {
    tickers: Vec<String>,
    values: Vec<f64>,
}

impl AnnualReturns {
    pub fn new(tickers: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if tickers.len() != values.len() {
            return Err(Error::Alignment(format!(
                "{} returns for {} tickers",
                values.len(),
                tickers.len()
            )));
        }
        Ok(Self { tickers, values })
    }

    pub fn from_stats(stats: &[AssetStats]) -> Self {
        Self {
            tickers: stats.iter().map(|s| s.ticker.clone()).collect(),
            values: stats.iter().map(|s| s.annual_return).collect(),
        }
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Annual return, annual risk and Sharpe ratio of one portfolio.
///
/// `sharpe` is NaN when `annual_risk` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioStats {
    pub annual_return: f64,
    pub annual_risk: f64,
    pub sharpe: f64,
}

/// Annual risk-free rate for the Sharpe ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskFreeRate(f64);

impl RiskFreeRate {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Domain(format!(
                "risk-free rate must be finite and non-negative, got {rate}"
            )));
        }
        Ok(Self(rate))
    }

    pub fn rate(self) -> f64 {
        self.0
    }
}

impl Default for RiskFreeRate {
    fn default() -> Self {
        Self(0.01)
    }
}

pub fn equal_weights(tickers: &[String]) -> Result<WeightVector> {
    if tickers.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let w = 1.0 / tickers.len() as f64;
    WeightVector::normalized(tickers.to_vec(), vec![w; tickers.len()])
}

fn check_tickers(expected: &[String], got: &[String], what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::Alignment(format!(
            "{what} tickers [{}] do not match weight tickers [{}]",
            got.join(", "),
            expected.join(", ")
        )));
    }
    Ok(())
}

/// `sum_i w_i * mu_i`.
pub fn portfolio_return(w: &WeightVector, mu: &AnnualReturns) -> Result<f64> {
    check_tickers(&w.tickers, &mu.tickers, "return")?;
    Ok(w.weights.iter().zip(&mu.values).map(|(a, b)| a * b).sum())
}

/// Daily-scale variance `w' * Cov * w`.
pub fn portfolio_variance(w: &WeightVector, cov: &CovarianceMatrix) -> Result<f64> {
    check_tickers(&w.tickers, cov.tickers(), "covariance")?;
    Ok(quadratic_form(&w.weights, cov))
}

pub(crate) fn quadratic_form(w: &[f64], cov: &CovarianceMatrix) -> f64 {
    let m = cov.entries();
    let n = w.len();
    let mut total = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| m[(i, j)] * w[j]).sum();
        total += w[i] * row;
    }
    total.max(0.0)
}

/// Annualized risk from a daily variance.
pub fn annual_risk(daily_variance: f64) -> f64 {
    (daily_variance * TRADING_DAYS).sqrt()
}

/// Excess return over the risk-free rate per unit of annual risk.
pub fn sharpe_ratio(annual_return: f64, annual_risk: f64, rf: RiskFreeRate) -> Result<f64> {
    if annual_risk.is_nan() || annual_risk <= 0.0 {
        return Err(Error::ZeroRisk(annual_risk));
    }
    Ok((annual_return - rf.rate()) / annual_risk)
}

pub fn portfolio_stats(
    w: &WeightVector,
    mu: &AnnualReturns,
    cov: &CovarianceMatrix,
    rf: RiskFreeRate,
) -> Result<PortfolioStats> {
    let annual_return = portfolio_return(w, mu)?;
    let risk = annual_risk(portfolio_variance(w, cov)?);
    Ok(PortfolioStats {
        annual_return,
        annual_risk: risk,
        sharpe: sharpe_ratio(annual_return, risk, rf).unwrap_or(f64::NAN),
    })
}
