//! End-to-end sector pipeline and the report files it writes.
//!
//! Output files (all UTF-8 CSV with a header row):
//!
//! | file                 | columns                                             |
//! |----------------------|-----------------------------------------------------|
//! | `stats.csv`          | `ticker,annual_return_pct,annual_risk_pct`          |
//! | `correlation.csv`    | `ticker,<TICKER...>`                                |
//! | `weights.csv`        | `ticker,ewp,mrp,orp`                                |
//! | `portfolios.csv`     | `metric,ewp,mrp,orp`                                |
//! | `frontier.csv`       | `risk,return,sharpe,<TICKER...>,flag`               |
//! | `backtest_ewp.csv`   | see [`crate::backtest::BACKTEST_HEADER`]            |
//! | `backtest_orp.csv`   | same                                                |
//! | `sector_result.csv`  | `sector,ewp_return,orp_return,winner`               |
//! | `summary.csv`        | `sector,ewp_return_pct,orp_return_pct,winner`       |
//!
//! Machine files carry 12 significant digits, report files 2 decimals
//! (weights 6).

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::backtest::{backtest_from_panel, write_backtest_csv, AllocationMode, BacktestReport};
use crate::error::{Error, Result, StageExt};
use crate::format::{fmt_fixed, fmt_pct, fmt_sig};
use crate::frontier::{
    export_frontier, min_risk_index, optimum_risk_index, sample_frontier, FrontierCloud,
    DEFAULT_SAMPLES,
};
use crate::market_data::{
    apply_missing_data_policy, DateRange, Exclusion, PricePanel, PriceTable, UniverseConfig,
    DEFAULT_MISSING_THRESHOLD,
};
use crate::portfolio::{
    equal_weights, portfolio_stats, AnnualReturns, PortfolioStats, RiskFreeRate, WeightVector,
};
use crate::return_stats::{
    asset_stats, correlation_matrix, covariance_matrix, AssetStats, CovarianceMatrix,
};

pub const DEFAULT_CAPITAL: f64 = 100_000.0;

pub const STATS_FILE: &str = "stats.csv";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const PORTFOLIOS_FILE: &str = "portfolios.csv";
pub const FRONTIER_FILE: &str = "frontier.csv";
pub const BACKTEST_EWP_FILE: &str = "backtest_ewp.csv";
pub const BACKTEST_ORP_FILE: &str = "backtest_orp.csv";
pub const SECTOR_RESULT_FILE: &str = "sector_result.csv";
pub const EXCLUSIONS_FILE: &str = "exclusions.log";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Ewp,
    Orp,
    Tie,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Ewp => "EWP",
            Winner::Orp => "ORP",
            Winner::Tie => "TIE",
        })
    }
}

impl FromStr for Winner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "EWP" => Ok(Winner::Ewp),
            "ORP" => Ok(Winner::Orp),
            "TIE" => Ok(Winner::Tie),
            other => Err(Error::Domain(format!("unknown winner {other:?}"))),
        }
    }
}

/// Test-window returns of the equal-weight and max-Sharpe portfolios.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorResult {
    pub sector: String,
    pub ewp_test_return: f64,
    pub orp_test_return: f64,
    pub winner: Winner,
}

impl SectorResult {
    pub fn new(sector: impl Into<String>, ewp_test_return: f64, orp_test_return: f64) -> Self {
        let winner = if ewp_test_return > orp_test_return {
            Winner::Ewp
        } else if orp_test_return > ewp_test_return {
            Winner::Orp
        } else {
            Winner::Tie
        };
        Self {
            sector: sector.into(),
            ewp_test_return,
            orp_test_return,
            winner,
        }
    }
}

/// Which portfolio column of a weights file to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortfolioKind {
    Ewp,
    Mrp,
    Orp,
}

impl PortfolioKind {
    pub fn label(self) -> &'static str {
        match self {
            PortfolioKind::Ewp => "ewp",
            PortfolioKind::Mrp => "mrp",
            PortfolioKind::Orp => "orp",
        }
    }
}

impl FromStr for PortfolioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ewp" => Ok(PortfolioKind::Ewp),
            "mrp" => Ok(PortfolioKind::Mrp),
            "orp" | "mvp" => Ok(PortfolioKind::Orp),
            other => Err(Error::Domain(format!("unknown portfolio {other:?}"))),
        }
    }
}

/// Capital split for the equal-weight backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EwpAllocation {
    /// `1/n` of capital for each of the `n` retained tickers.
    #[default]
    Simplex,
    /// `capital / universe size` per retained ticker; excluded tickers leave
    /// their slot uninvested.
    FixedSlots,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub universe_path: PathBuf,
    pub prices_path: PathBuf,
    /// Overrides the universe's training window.
    pub train: Option<DateRange>,
    /// Overrides the universe's test window.
    pub test: Option<DateRange>,
    pub samples: usize,
    pub seed: u64,
    pub rf: RiskFreeRate,
    pub out_dir: PathBuf,
    pub capital: f64,
    pub missing_threshold: f64,
    pub ewp_allocation: EwpAllocation,
}

impl RunConfig {
    pub fn new(
        universe_path: impl Into<PathBuf>,
        prices_path: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            universe_path: universe_path.into(),
            prices_path: prices_path.into(),
            train: None,
            test: None,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            rf: RiskFreeRate::default(),
            out_dir: out_dir.into(),
            capital: DEFAULT_CAPITAL,
            missing_threshold: DEFAULT_MISSING_THRESHOLD,
            ewp_allocation: EwpAllocation::Simplex,
        }
    }

    /// Loads the universe and applies window overrides.
    pub fn universe(&self) -> Result<UniverseConfig> {
        let mut u = UniverseConfig::from_path(&self.universe_path)?;
        if let Some(t) = self.train {
            u.train = t;
        }
        if let Some(t) = self.test {
            u.test = t;
        }
        u.validate()?;
        Ok(u)
    }
}

/// Everything computed on the training window.
#[derive(Debug, Clone)]
pub struct TrainingAnalysis {
    pub universe: UniverseConfig,
    pub panel: PricePanel,
    pub exclusions: Vec<Exclusion>,
    pub stats: Vec<AssetStats>,
    pub covariance: CovarianceMatrix,
    pub correlation: DMatrix<f64>,
    pub returns: AnnualReturns,
    pub ewp: WeightVector,
    pub cloud: FrontierCloud,
    pub mrp_index: usize,
    pub orp_index: usize,
}

impl TrainingAnalysis {
    pub fn mrp(&self) -> &WeightVector {
        &self.cloud.samples()[self.mrp_index].weights
    }

    pub fn orp(&self) -> &WeightVector {
        &self.cloud.samples()[self.orp_index].weights
    }

    pub fn portfolio(&self, kind: PortfolioKind) -> &WeightVector {
        match kind {
            PortfolioKind::Ewp => &self.ewp,
            PortfolioKind::Mrp => self.mrp(),
            PortfolioKind::Orp => self.orp(),
        }
    }

    pub fn portfolio_stats(&self, kind: PortfolioKind) -> Result<PortfolioStats> {
        portfolio_stats(
            self.portfolio(kind),
            &self.returns,
            &self.covariance,
            self.cloud.rf(),
        )
    }
}

fn load_table(cfg: &RunConfig) -> Result<PriceTable> {
    PriceTable::read_path(&cfg.prices_path)
}

fn analyze_with(
    cfg: &RunConfig,
    universe: UniverseConfig,
    table: &PriceTable,
) -> Result<TrainingAnalysis> {
    let raw = table
        .panel(&universe.tickers, universe.train)
        .stage("load")?;
    let (panel, exclusions) =
        apply_missing_data_policy(&raw, cfg.missing_threshold).stage("missing-data")?;
    let stats = asset_stats(&panel).stage("stats")?;
    let covariance = covariance_matrix(&panel).stage("covariance")?;
    let correlation = correlation_matrix(&covariance).stage("covariance")?;
    let returns = AnnualReturns::from_stats(&stats);
    let ewp = equal_weights(panel.tickers()).stage("portfolio")?;
    let cloud =
        sample_frontier(&returns, &covariance, cfg.samples, cfg.seed, cfg.rf).stage("frontier")?;
    let mrp_index = min_risk_index(&cloud).stage("frontier")?;
    let orp_index = optimum_risk_index(&cloud).stage("frontier")?;
    Ok(TrainingAnalysis {
        universe,
        panel,
        exclusions,
        stats,
        covariance,
        correlation,
        returns,
        ewp,
        cloud,
        mrp_index,
        orp_index,
    })
}

/// Load, gap policy, statistics, covariance and frontier on the training
/// window.
pub fn analyze_training(cfg: &RunConfig) -> Result<TrainingAnalysis> {
    let universe = cfg.universe().stage("config")?;
    let table = load_table(cfg).stage("load")?;
    analyze_with(cfg, universe, &table)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn finish<W: Write>(w: W, path: &Path) -> Result<()> {
    let mut w = w;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    let mut w = create(path)?;
    f(&mut w)?;
    finish(w, path)?;
    Ok(path.to_path_buf())
}

pub fn write_stats_csv<W: Write>(stats: &[AssetStats], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["ticker", "annual_return_pct", "annual_risk_pct"])?;
    for s in stats {
        wtr.write_record([
            s.ticker.clone(),
            fmt_pct(s.annual_return),
            fmt_pct(s.annual_volatility),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `(ticker, annual_return, annual_risk)` as fractions.
pub fn read_stats_csv<R: Read>(input: R) -> Result<Vec<(String, f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr
        .headers()?
        .iter()
        .ne(["ticker", "annual_return_pct", "annual_risk_pct"])
    {
        return Err(Error::format(1, "not a stats file"));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let pct = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map(|v| v / 100.0)
                    .map_err(|_| Error::format(line, format!("bad number {:?}", &rec[k])))
            };
            Ok((rec[0].to_string(), pct(1)?, pct(2)?))
        })
        .collect()
}

pub fn write_matrix_csv<W: Write>(tickers: &[String], m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["ticker".to_string()];
    header.extend(tickers.iter().cloned());
    wtr.write_record(&header)?;
    for (i, t) in tickers.iter().enumerate() {
        let mut rec = vec![t.clone()];
        rec.extend((0..tickers.len()).map(|j| fmt_sig(m[(i, j)])));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// The three portfolios over a common ticker ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsTable {
    pub ewp: WeightVector,
    pub mrp: WeightVector,
    pub orp: WeightVector,
}

impl WeightsTable {
    pub fn get(&self, kind: PortfolioKind) -> &WeightVector {
        match kind {
            PortfolioKind::Ewp => &self.ewp,
            PortfolioKind::Mrp => &self.mrp,
            PortfolioKind::Orp => &self.orp,
        }
    }
}

pub fn write_weights_csv<W: Write>(table: &WeightsTable, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["ticker", "ewp", "mrp", "orp"])?;
    for (i, t) in table.ewp.tickers().iter().enumerate() {
        wtr.write_record([
            t.clone(),
            fmt_fixed(table.ewp.weights()[i], 6),
            fmt_fixed(table.mrp.weights()[i], 6),
            fmt_fixed(table.orp.weights()[i], 6),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a weights file; each column is renormalized onto the simplex to
/// absorb the 6-decimal rounding.
pub fn read_weights_csv<R: Read>(input: R) -> Result<WeightsTable> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(["ticker", "ewp", "mrp", "orp"]) {
        return Err(Error::format(1, "not a weights file"));
    }
    let mut tickers = Vec::new();
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        tickers.push(rec[0].to_string());
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(
                rec[k + 1]
                    .parse::<f64>()
                    .map_err(|_| Error::format(line, format!("bad weight {:?}", &rec[k + 1])))?,
            );
        }
    }
    let [e, m, o] = cols;
    Ok(WeightsTable {
        ewp: WeightVector::normalized(tickers.clone(), e)?,
        mrp: WeightVector::normalized(tickers.clone(), m)?,
        orp: WeightVector::normalized(tickers, o)?,
    })
}

pub fn write_portfolios_csv<W: Write>(stats: &[PortfolioStats; 3], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["metric", "ewp", "mrp", "orp"])?;
    let row = |name: &str, f: &dyn Fn(&PortfolioStats) -> String| {
        let mut r = vec![name.to_string()];
        r.extend(stats.iter().map(f));
        r
    };
    wtr.write_record(row("annual_return_pct", &|s| fmt_pct(s.annual_return)))?;
    wtr.write_record(row("annual_risk_pct", &|s| fmt_pct(s.annual_risk)))?;
    wtr.write_record(row("sharpe", &|s| fmt_fixed(s.sharpe, 4)))?;
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

const SECTOR_RESULT_HEADER: [&str; 4] = ["sector", "ewp_return", "orp_return", "winner"];
const SUMMARY_HEADER: [&str; 4] = ["sector", "ewp_return_pct", "orp_return_pct", "winner"];

pub fn write_sector_results<W: Write>(results: &[SectorResult], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(SECTOR_RESULT_HEADER)?;
    for r in results {
        wtr.write_record([
            r.sector.clone(),
            fmt_sig(r.ewp_test_return),
            fmt_sig(r.orp_test_return),
            r.winner.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads sector results (fractions); the winner is recomputed from the
/// returns and must agree with the stored column.
pub fn read_sector_results<R: Read>(input: R) -> Result<Vec<SectorResult>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(SECTOR_RESULT_HEADER) {
        return Err(Error::format(1, "not a sector result file"));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .parse()
                    .map_err(|_| Error::format(line, format!("bad number {:?}", &rec[k])))
            };
            let r = SectorResult::new(&rec[0], num(1)?, num(2)?);
            let stored: Winner = rec[3]
                .parse()
                .map_err(|e: Error| Error::format(line, e.to_string()))?;
            if stored != r.winner {
                return Err(Error::format(
                    line,
                    format!("winner {stored} disagrees with returns ({})", r.winner),
                ));
            }
            Ok(r)
        })
        .collect()
}

/// Cross-sector comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SectorResult>,
}

impl SummaryTable {
    pub fn wins(&self, w: Winner) -> usize {
        self.rows.iter().filter(|r| r.winner == w).count()
    }

    pub fn footer(&self) -> String {
        let mut s = format!(
            "EWP wins: {}, ORP wins: {}",
            self.wins(Winner::Ewp),
            self.wins(Winner::Orp)
        );
        let ties = self.wins(Winner::Tie);
        if ties > 0 {
            s.push_str(&format!(", ties: {ties}"));
        }
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        {
            let mut wtr = csv::Writer::from_writer(&mut out);
            wtr.write_record(SUMMARY_HEADER)?;
            for r in &self.rows {
                wtr.write_record([
                    r.sector.clone(),
                    fmt_pct(r.ewp_test_return),
                    fmt_pct(r.orp_test_return),
                    r.winner.to_string(),
                ])?;
            }
            wtr.flush().map_err(csv::Error::from)?;
        }
        writeln!(out, "# {}", self.footer()).map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    /// Parses a summary file; the footer comment is ignored.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        if rdr.headers()?.iter().ne(SUMMARY_HEADER) {
            return Err(Error::format(1, "not a summary file"));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let pct = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map(|v| v / 100.0)
                    .map_err(|_| Error::format(line, format!("bad number {:?}", &rec[k])))
            };
            let mut r = SectorResult::new(&rec[0], pct(1)?, pct(2)?);
            r.winner = rec[3]
                .parse()
                .map_err(|e: Error| Error::format(line, e.to_string()))?;
            rows.push(r);
        }
        Ok(Self { rows })
    }
}

/// Builds the cross-sector table; input order is kept.
pub fn cmd_summary(results: &[SectorResult]) -> Result<SummaryTable> {
    if results.is_empty() {
        return Err(Error::EmptySummary);
    }
    Ok(SummaryTable {
        rows: results.to_vec(),
    })
}

/// Writes `summary.csv` into `out_dir`.
pub fn write_summary(results: &[SectorResult], out_dir: &Path) -> Result<(SummaryTable, PathBuf)> {
    let table = cmd_summary(results)?;
    ensure_dir(out_dir)?;
    let path = write_file(&out_dir.join(SUMMARY_FILE), |w| table.write_csv(w))?;
    Ok((table, path))
}

/// Writes the per-ticker return/risk table.
pub fn cmd_stats(cfg: &RunConfig) -> Result<PathBuf> {
    let universe = cfg.universe().stage("config")?;
    let table = load_table(cfg).stage("load")?;
    let raw = table
        .panel(&universe.tickers, universe.train)
        .stage("load")?;
    let (panel, exclusions) =
        apply_missing_data_policy(&raw, cfg.missing_threshold).stage("missing-data")?;
    let stats = asset_stats(&panel).stage("stats")?;
    ensure_dir(&cfg.out_dir).stage("write")?;
    write_exclusions(&cfg.out_dir, &exclusions, cfg.missing_threshold).stage("write")?;
    write_file(&cfg.out_dir.join(STATS_FILE), |w| {
        write_stats_csv(&stats, w)
    })
    .stage("write")
}

pub fn cmd_weights(cfg: &RunConfig) -> Result<PathBuf> {
    let a = analyze_training(cfg)?;
    ensure_dir(&cfg.out_dir).stage("write")?;
    write_file(&cfg.out_dir.join(WEIGHTS_FILE), |w| {
        write_weights_csv(&weights_table(&a), w)
    })
    .stage("write")
}

pub fn cmd_frontier(cfg: &RunConfig) -> Result<PathBuf> {
    let a = analyze_training(cfg)?;
    ensure_dir(&cfg.out_dir).stage("write")?;
    write_file(&cfg.out_dir.join(FRONTIER_FILE), |w| {
        export_frontier(&a.cloud, w)
    })
    .stage("write")
}

fn weights_table(a: &TrainingAnalysis) -> WeightsTable {
    WeightsTable {
        ewp: a.ewp.clone(),
        mrp: a.mrp().clone(),
        orp: a.orp().clone(),
    }
}

fn ewp_mode(cfg: &RunConfig, universe: &UniverseConfig, kind: PortfolioKind) -> AllocationMode {
    match (kind, cfg.ewp_allocation) {
        (PortfolioKind::Ewp, EwpAllocation::FixedSlots) => AllocationMode::FixedAmount {
            nominal_count: universe.tickers.len(),
        },
        _ => AllocationMode::Simplex,
    }
}

fn test_panel(table: &PriceTable, tickers: &[String], window: DateRange) -> Result<PricePanel> {
    let raw = table.panel(tickers, window)?;
    // Fill only; a ticker with no test-window data at all cannot be valued.
    let (panel, excluded) = apply_missing_data_policy(&raw, 1.0)?;
    if let Some(e) = excluded.first() {
        return Err(Error::Alignment(format!(
            "{} has no prices in the test window",
            e.ticker
        )));
    }
    Ok(panel)
}

/// Backtests one column of a weights file over the test window.
pub fn cmd_backtest(
    cfg: &RunConfig,
    weights_path: &Path,
    kind: PortfolioKind,
) -> Result<(BacktestReport, PathBuf)> {
    let universe = cfg.universe().stage("config")?;
    let file = File::open(weights_path)
        .map_err(|e| Error::io(weights_path, e))
        .stage("load")?;
    let weights = read_weights_csv(file).stage("load")?;
    let w = weights.get(kind);
    let table = load_table(cfg).stage("load")?;
    let panel = test_panel(&table, w.tickers(), universe.test).stage("load")?;
    let report = backtest_from_panel(w, &panel, cfg.capital, ewp_mode(cfg, &universe, kind))
        .stage("backtest")?;
    ensure_dir(&cfg.out_dir).stage("write")?;
    let path = cfg.out_dir.join(format!("backtest_{}.csv", kind.label()));
    let path = write_file(&path, |w| write_backtest_csv(&report, w)).stage("write")?;
    Ok((report, path))
}

fn write_exclusions(dir: &Path, exclusions: &[Exclusion], threshold: f64) -> Result<PathBuf> {
    write_file(&dir.join(EXCLUSIONS_FILE), |w| {
        let io = |e: std::io::Error| Error::io(dir.join(EXCLUSIONS_FILE), e);
        if exclusions.is_empty() {
            writeln!(w, "no tickers excluded").map_err(io)?;
        }
        for e in exclusions {
            writeln!(
                w,
                "excluded {}: {}% of training observations missing (threshold {}%)",
                e.ticker,
                fmt_pct(e.missing_fraction),
                fmt_pct(threshold)
            )
            .map_err(io)?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub result: SectorResult,
    pub analysis: TrainingAnalysis,
    pub ewp_backtest: BacktestReport,
    pub orp_backtest: BacktestReport,
    pub files: Vec<PathBuf>,
}

/// Runs one sector end to end and writes every artifact into `out_dir`.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    let universe = cfg.universe().stage("config")?;
    let table = load_table(cfg).stage("load")?;
    let analysis = analyze_with(cfg, universe.clone(), &table)?;

    let panel = test_panel(&table, analysis.panel.tickers(), universe.test).stage("backtest")?;
    let ewp_backtest = backtest_from_panel(
        &analysis.ewp,
        &panel,
        cfg.capital,
        ewp_mode(cfg, &universe, PortfolioKind::Ewp),
    )
    .stage("backtest")?;
    let orp_backtest =
        backtest_from_panel(analysis.orp(), &panel, cfg.capital, AllocationMode::Simplex)
            .stage("backtest")?;
    let result = SectorResult::new(
        universe.sector.clone(),
        ewp_backtest.holding_return,
        orp_backtest.holding_return,
    );

    let dir = &cfg.out_dir;
    let files = (|| -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let pstats = [
            analysis.portfolio_stats(PortfolioKind::Ewp)?,
            analysis.portfolio_stats(PortfolioKind::Mrp)?,
            analysis.portfolio_stats(PortfolioKind::Orp)?,
        ];
        Ok(vec![
            write_file(&dir.join(STATS_FILE), |w| {
                write_stats_csv(&analysis.stats, w)
            })?,
            write_file(&dir.join(CORRELATION_FILE), |w| {
                write_matrix_csv(analysis.panel.tickers(), &analysis.correlation, w)
            })?,
            write_file(&dir.join(WEIGHTS_FILE), |w| {
                write_weights_csv(&weights_table(&analysis), w)
            })?,
            write_file(&dir.join(PORTFOLIOS_FILE), |w| {
                write_portfolios_csv(&pstats, w)
            })?,
            write_file(&dir.join(FRONTIER_FILE), |w| {
                export_frontier(&analysis.cloud, w)
            })?,
            write_file(&dir.join(BACKTEST_EWP_FILE), |w| {
                write_backtest_csv(&ewp_backtest, w)
            })?,
            write_file(&dir.join(BACKTEST_ORP_FILE), |w| {
                write_backtest_csv(&orp_backtest, w)
            })?,
            write_file(&dir.join(SECTOR_RESULT_FILE), |w| {
                write_sector_results(std::slice::from_ref(&result), w)
            })?,
            write_exclusions(dir, &analysis.exclusions, cfg.missing_threshold)?,
        ])
    })()
    .stage("write")?;

    Ok(PipelineOutput {
        result,
        analysis,
        ewp_backtest,
        orp_backtest,
        files,
    })
}

/// Lower-case, alphanumerics and dashes only; used for per-sector folders.
pub fn sector_slug(sector: &str) -> String {
    let mut slug = String::new();
    for c in sector.chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('-') && !slug.is_empty() {
            slug.push('-');
        }
    }
    slug.trim_end_matches('-').to_string()
}

/// Runs [`cmd_pipeline`] for every `*.toml` universe in `universe_dir`
/// (sorted by file name), each into `out_dir/<sector-slug>/`, then writes
/// `summary.csv` into `out_dir`.
pub fn cmd_pipeline_all(
    universe_dir: &Path,
    template: &RunConfig,
) -> Result<(SummaryTable, Vec<PipelineOutput>)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(universe_dir)
        .map_err(|e| Error::io(universe_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no *.toml universe files in {}",
            universe_dir.display()
        )));
    }
    let outputs = paths
        .par_iter()
        .map(|path| {
            let universe = UniverseConfig::from_path(path).stage("config")?;
            let mut cfg = template.clone();
            cfg.universe_path = path.clone();
            cfg.out_dir = template.out_dir.join(sector_slug(&universe.sector));
            cmd_pipeline(&cfg).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<SectorResult> = outputs.iter().map(|o| o.result.clone()).collect();
    let (table, _) = write_summary(&results, &template.out_dir).stage("write")?;
    Ok((table, outputs))
}
