//! Python bindings: `import sectorfolio_py`.
//!
//! Matrices cross the boundary as lists of rows, dates as ISO strings.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sectorfolio::backtest::AllocationMode;
use sectorfolio::frontier::{self, export_frontier};
use sectorfolio::market_data::{self, DateRange, PriceTable};
use sectorfolio::portfolio::{self, AnnualReturns, RiskFreeRate, WeightVector};
use sectorfolio::report::{self, RunConfig, SectorResult};
use sectorfolio::return_stats::{self, CovarianceMatrix};

create_exception!(sectorfolio_py, SectorfolioError, PyValueError);

fn err(e: sectorfolio::Error) -> PyErr {
    SectorfolioError::new_err(e.to_string())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix(tickers: &[String], rows: Vec<Vec<f64>>) -> PyResult<CovarianceMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err(
            "covariance must be a square list of rows",
        ));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    CovarianceMatrix::new(tickers.to_vec(), DMatrix::from_row_slice(n, n, &flat)).map_err(err)
}

fn weight_vector(tickers: Vec<String>, w: Vec<f64>) -> PyResult<WeightVector> {
    WeightVector::normalized(tickers, w).map_err(err)
}

/// Aligned closes; `None` marks a day the ticker did not trade.
#[pyclass(module = "sectorfolio_py", name = "PricePanel")]
struct PyPricePanel {
    inner: market_data::PricePanel,
}

#[pymethods]
impl PyPricePanel {
    /// Loads `tickers` over `start..=end` from a long or wide price CSV.
    #[staticmethod]
    fn load(path: PathBuf, tickers: Vec<String>, start: &str, end: &str) -> PyResult<Self> {
        let window: DateRange = format!("{start}:{end}").parse().map_err(err)?;
        let table = PriceTable::read_path(path).map_err(err)?;
        Ok(Self {
            inner: table.panel(&tickers, window).map_err(err)?,
        })
    }

    #[getter]
    fn tickers(&self) -> Vec<String> {
        self.inner.tickers().to_vec()
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    /// Missing-day count per ticker.
    #[getter]
    fn gaps(&self) -> Vec<usize> {
        self.inner.gaps().to_vec()
    }

    /// One list per ticker.
    fn closes(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.inner.n_tickers())
            .map(|i| {
                (0..self.inner.n_dates())
                    .map(|d| self.inner.close(i, d))
                    .collect()
            })
            .collect()
    }

    /// Returns the filled panel and `(ticker, missing_fraction)` for every
    /// excluded ticker.
    #[pyo3(signature = (threshold = market_data::DEFAULT_MISSING_THRESHOLD))]
    fn apply_missing_data_policy(&self, threshold: f64) -> PyResult<(Self, Vec<(String, f64)>)> {
        let (panel, excluded) =
            market_data::apply_missing_data_policy(&self.inner, threshold).map_err(err)?;
        Ok((
            Self { inner: panel },
            excluded
                .into_iter()
                .map(|e| (e.ticker, e.missing_fraction))
                .collect(),
        ))
    }

    fn __len__(&self) -> usize {
        self.inner.n_dates()
    }

    fn __repr__(&self) -> String {
        format!(
            "PricePanel({} tickers x {} dates)",
            self.inner.n_tickers(),
            self.inner.n_dates()
        )
    }
}

/// `[{ticker, annual_return, daily_volatility, annual_volatility}, ...]`
#[pyfunction]
fn asset_stats<'py>(py: Python<'py>, panel: &PyPricePanel) -> PyResult<Vec<Bound<'py, PyDict>>> {
    return_stats::asset_stats(&panel.inner)
        .map_err(err)?
        .into_iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("ticker", s.ticker)?;
            d.set_item("annual_return", s.annual_return)?;
            d.set_item("daily_volatility", s.daily_volatility)?;
            d.set_item("annual_volatility", s.annual_volatility)?;
            Ok(d)
        })
        .collect()
}

/// Daily-scale sample covariance of a gap-free panel.
#[pyfunction]
fn covariance_matrix(panel: &PyPricePanel) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(
        return_stats::covariance_matrix(&panel.inner)
            .map_err(err)?
            .entries(),
    ))
}

#[pyfunction]
fn correlation_matrix(panel: &PyPricePanel) -> PyResult<Vec<Vec<f64>>> {
    let cov = return_stats::covariance_matrix(&panel.inner).map_err(err)?;
    Ok(rows(&return_stats::correlation_matrix(&cov).map_err(err)?))
}

#[pyfunction]
fn equal_weights(tickers: Vec<String>) -> PyResult<Vec<f64>> {
    Ok(portfolio::equal_weights(&tickers)
        .map_err(err)?
        .weights()
        .to_vec())
}

#[pyfunction]
fn portfolio_return(weights: Vec<f64>, annual_returns: Vec<f64>) -> PyResult<f64> {
    let t: Vec<String> = (0..weights.len()).map(|i| i.to_string()).collect();
    let mu = AnnualReturns::new(t.clone(), annual_returns).map_err(err)?;
    portfolio::portfolio_return(&weight_vector(t, weights)?, &mu).map_err(err)
}

/// Daily-scale `w' C w`.
#[pyfunction]
fn portfolio_variance(weights: Vec<f64>, covariance: Vec<Vec<f64>>) -> PyResult<f64> {
    let t: Vec<String> = (0..weights.len()).map(|i| i.to_string()).collect();
    let cov = matrix(&t, covariance)?;
    portfolio::portfolio_variance(&weight_vector(t, weights)?, &cov).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (annual_return, annual_risk, rf = 0.01))]
fn sharpe_ratio(annual_return: f64, annual_risk: f64, rf: f64) -> PyResult<f64> {
    portfolio::sharpe_ratio(
        annual_return,
        annual_risk,
        RiskFreeRate::new(rf).map_err(err)?,
    )
    .map_err(err)
}

/// Sampled long-only portfolios.
#[pyclass(module = "sectorfolio_py", name = "FrontierCloud")]
struct PyFrontierCloud {
    inner: frontier::FrontierCloud,
}

fn sample_dict<'py>(py: Python<'py>, s: &frontier::FrontierSample) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("weights", s.weights.weights().to_vec())?;
    d.set_item("annual_return", s.annual_return)?;
    d.set_item("annual_risk", s.annual_risk)?;
    d.set_item("sharpe", s.sharpe)?;
    Ok(d)
}

#[pymethods]
impl PyFrontierCloud {
    #[getter]
    fn tickers(&self) -> Vec<String> {
        self.inner.tickers().to_vec()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    fn risks(&self) -> Vec<f64> {
        self.inner.samples().iter().map(|s| s.annual_risk).collect()
    }

    fn returns(&self) -> Vec<f64> {
        self.inner
            .samples()
            .iter()
            .map(|s| s.annual_return)
            .collect()
    }

    fn sharpes(&self) -> Vec<f64> {
        self.inner.samples().iter().map(|s| s.sharpe).collect()
    }

    /// The minimum-risk sample.
    fn min_risk<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        sample_dict(py, frontier::min_risk_portfolio(&self.inner).map_err(err)?)
    }

    /// The maximum-Sharpe sample.
    fn optimum_risk<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        sample_dict(
            py,
            frontier::optimum_risk_portfolio(&self.inner).map_err(err)?,
        )
    }

    fn to_csv(&self, path: PathBuf) -> PyResult<()> {
        let f = std::fs::File::create(&path)
            .map_err(|e| SectorfolioError::new_err(format!("{}: {e}", path.display())))?;
        export_frontier(&self.inner, std::io::BufWriter::new(f)).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.sample_count()
    }
}

#[pyfunction]
#[pyo3(signature = (tickers, annual_returns, covariance, n_samples = frontier::DEFAULT_SAMPLES, seed = 0, rf = 0.01))]
fn sample_frontier(
    py: Python<'_>,
    tickers: Vec<String>,
    annual_returns: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    n_samples: usize,
    seed: u64,
    rf: f64,
) -> PyResult<PyFrontierCloud> {
    let mu = AnnualReturns::new(tickers.clone(), annual_returns).map_err(err)?;
    let cov = matrix(&tickers, covariance)?;
    let rf = RiskFreeRate::new(rf).map_err(err)?;
    let inner = py
        .detach(|| frontier::sample_frontier(&mu, &cov, n_samples, seed, rf))
        .map_err(err)?;
    Ok(PyFrontierCloud { inner })
}

/// Buy-and-hold from `buy` to `sell` prices. With `nominal_count`, every
/// ticker gets `capital / nominal_count` regardless of `weights`.
#[pyfunction]
#[pyo3(signature = (tickers, weights, buy, sell, capital = report::DEFAULT_CAPITAL, nominal_count = None))]
fn run_backtest<'py>(
    py: Python<'py>,
    tickers: Vec<String>,
    weights: Vec<f64>,
    buy: BTreeMap<String, f64>,
    sell: BTreeMap<String, f64>,
    capital: f64,
    nominal_count: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match nominal_count {
        Some(n) => AllocationMode::FixedAmount { nominal_count: n },
        None => AllocationMode::Simplex,
    };
    let r = sectorfolio::backtest::run_backtest(
        &weight_vector(tickers, weights)?,
        &buy,
        &sell,
        capital,
        mode,
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("initial_capital", r.initial_capital)?;
    d.set_item("terminal_capital", r.terminal_capital)?;
    d.set_item("holding_return", r.holding_return)?;
    d.set_item(
        "amounts",
        r.allocations
            .iter()
            .map(|a| (a.ticker.clone(), a.amount_invested))
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

type SummaryRow = (String, f64, f64, String);

/// `results` are `(sector, ewp_return, orp_return)`; returns the rows with a
/// winner column and the win-count footer.
#[pyfunction]
fn summarize(results: Vec<(String, f64, f64)>) -> PyResult<(Vec<SummaryRow>, String)> {
    let rs: Vec<SectorResult> = results
        .into_iter()
        .map(|(s, e, o)| SectorResult::new(s, e, o))
        .collect();
    let table = report::cmd_summary(&rs).map_err(err)?;
    Ok((
        table
            .rows
            .iter()
            .map(|r| {
                (
                    r.sector.clone(),
                    r.ewp_test_return,
                    r.orp_test_return,
                    r.winner.to_string(),
                )
            })
            .collect(),
        table.footer(),
    ))
}

/// Runs one sector end to end, writing the report files into `out`.
#[pyfunction]
#[pyo3(signature = (universe, prices, out, n_samples = frontier::DEFAULT_SAMPLES, seed = 0, rf = 0.01))]
fn run_pipeline<'py>(
    py: Python<'py>,
    universe: PathBuf,
    prices: PathBuf,
    out: PathBuf,
    n_samples: usize,
    seed: u64,
    rf: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = RunConfig::new(universe, prices, out);
    cfg.samples = n_samples;
    cfg.seed = seed;
    cfg.rf = RiskFreeRate::new(rf).map_err(err)?;
    let o = py.detach(|| report::cmd_pipeline(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("sector", &o.result.sector)?;
    d.set_item("ewp_return", o.result.ewp_test_return)?;
    d.set_item("orp_return", o.result.orp_test_return)?;
    d.set_item("winner", o.result.winner.to_string())?;
    d.set_item("tickers", o.analysis.panel.tickers().to_vec())?;
    d.set_item(
        "excluded",
        o.analysis
            .exclusions
            .iter()
            .map(|e| e.ticker.clone())
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pymodule]
fn sectorfolio_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SectorfolioError", m.py().get_type::<SectorfolioError>())?;
    m.add("TRADING_DAYS", return_stats::TRADING_DAYS)?;
    m.add_class::<PyPricePanel>()?;
    m.add_class::<PyFrontierCloud>()?;
    m.add_function(wrap_pyfunction!(asset_stats, m)?)?;
    m.add_function(wrap_pyfunction!(covariance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(equal_weights, m)?)?;
    m.add_function(wrap_pyfunction!(portfolio_return, m)?)?;
    m.add_function(wrap_pyfunction!(portfolio_variance, m)?)?;
    m.add_function(wrap_pyfunction!(sharpe_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(sample_frontier, m)?)?;
    m.add_function(wrap_pyfunction!(run_backtest, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
