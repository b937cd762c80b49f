//! Sector portfolio analytics: price loading with a missing-data policy,
//! return statistics, equal-weight and Monte Carlo frontier portfolios,
//! buy-and-hold backtests and a cross-sector winner table.
//!
//! ```no_run
//! use sectorfolio::report::{cmd_pipeline, RunConfig};
//!
//! let cfg = RunConfig::new("data/universes/auto.toml", "prices.csv", "out/auto");
//! let out = cmd_pipeline(&cfg)?;
//! println!("{}: {}", out.result.sector, out.result.winner);
//! # Ok::<(), sectorfolio::Error>(())
//! ```

pub mod backtest;
pub mod error;
pub mod format;
pub mod frontier;
pub mod market_data;
pub mod portfolio;
pub mod report;
pub mod return_stats;

pub use backtest::{run_backtest, Allocation, AllocationMode, BacktestReport};
pub use error::{Error, Result};
pub use frontier::{
    min_risk_portfolio, optimum_risk_portfolio, sample_frontier, FrontierCloud, FrontierSample,
};
pub use market_data::{
    apply_missing_data_policy, load_price_panel, DateRange, PricePanel, PriceSeries, PriceTable,
    UniverseConfig,
};
pub use portfolio::{
    equal_weights, portfolio_return, portfolio_stats, portfolio_variance, sharpe_ratio,
    AnnualReturns, PortfolioStats, RiskFreeRate, WeightVector,
};
pub use report::{cmd_pipeline, cmd_summary, RunConfig, SectorResult, Winner};
pub use return_stats::{
    annual_volatility, annualize_return, asset_stats, correlation_matrix, covariance_matrix,
    daily_returns, daily_volatility, AssetStats, CovarianceMatrix, TRADING_DAYS,
};
