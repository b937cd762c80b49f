mod fetch;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sectorfolio::format::fmt_pct;
use sectorfolio::market_data::{DateRange, UniverseConfig, DEFAULT_MISSING_THRESHOLD};
use sectorfolio::portfolio::RiskFreeRate;
use sectorfolio::report::{
    cmd_backtest, cmd_frontier, cmd_pipeline, cmd_pipeline_all, cmd_stats, cmd_weights,
    read_sector_results, write_summary, EwpAllocation, PortfolioKind, RunConfig, DEFAULT_CAPITAL,
};

#[derive(Parser)]
#[command(name = "sectorfolio", version, about = "Sector portfolio analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-ticker annual return and risk over the training window.
    Stats(Common),
    /// Equal-weight, minimum-risk and max-Sharpe weights.
    Weights(Common),
    /// Every sampled portfolio with the two selected ones flagged.
    Frontier(Common),
    /// Buy-and-hold one column of a weights file over the test window.
    Backtest {
        #[command(flatten)]
        common: Common,
        /// Weights file written by `weights` or `pipeline`.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, value_enum, default_value_t = Portfolio::Orp)]
        portfolio: Portfolio,
    },
    /// Run one sector end to end, or every universe in a directory.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Directory of universe TOML files; each sector writes to
        /// `<out>/<sector>/` and a summary goes to `<out>/summary.csv`.
        #[arg(long, conflicts_with = "universe")]
        all: Option<PathBuf>,
    },
    /// Combine sector_result.csv files into summary.csv.
    Summary {
        /// sector_result.csv files, in the row order wanted.
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Download daily closes for a universe into a long CSV.
    Fetch {
        #[arg(long)]
        universe: PathBuf,
        /// Output CSV path.
        #[arg(long, default_value = "prices.csv")]
        out: PathBuf,
        /// Exchange suffix appended to each ticker for the lookup.
        #[arg(long, default_value = ".NS")]
        suffix: String,
        /// Date span to download; defaults to training start through test end.
        #[arg(long)]
        range: Option<DateRange>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    universe: Option<PathBuf>,
    #[arg(long)]
    prices: PathBuf,
    /// Training window `YYYY-MM-DD:YYYY-MM-DD`; overrides the universe file.
    #[arg(long)]
    train: Option<DateRange>,
    /// Test window `YYYY-MM-DD:YYYY-MM-DD`; overrides the universe file.
    #[arg(long)]
    test: Option<DateRange>,
    #[arg(long, default_value_t = sectorfolio::frontier::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Annual risk-free rate as a fraction.
    #[arg(long, default_value_t = 0.01)]
    rf: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CAPITAL)]
    capital: f64,
    /// Tickers missing more than this share of training days are dropped.
    #[arg(long, default_value_t = DEFAULT_MISSING_THRESHOLD)]
    missing_threshold: f64,
    #[arg(long, value_enum, default_value_t = EwpMode::Simplex)]
    ewp_mode: EwpMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum EwpMode {
    /// 1/n of capital per retained ticker.
    Simplex,
    /// capital / universe size per retained ticker.
    FixedAmount,
}

#[derive(Clone, Copy, ValueEnum)]
enum Portfolio {
    Ewp,
    Mrp,
    Orp,
}

impl Common {
    fn config(&self, universe: Option<PathBuf>) -> Result<RunConfig> {
        let universe = universe
            .or_else(|| self.universe.clone())
            .ok_or_else(|| anyhow!("--universe is required"))?;
        let mut cfg = RunConfig::new(universe, &self.prices, &self.out);
        cfg.train = self.train;
        cfg.test = self.test;
        if self.samples == 0 {
            bail!("--samples must be positive");
        }
        cfg.samples = self.samples;
        cfg.seed = self.seed;
        cfg.rf = RiskFreeRate::new(self.rf)?;
        cfg.capital = self.capital;
        cfg.missing_threshold = self.missing_threshold;
        cfg.ewp_allocation = match self.ewp_mode {
            EwpMode::Simplex => EwpAllocation::Simplex,
            EwpMode::FixedAmount => EwpAllocation::FixedSlots,
        };
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats(c) => println!("{}", cmd_stats(&c.config(None)?)?.display()),
        Command::Weights(c) => println!("{}", cmd_weights(&c.config(None)?)?.display()),
        Command::Frontier(c) => println!("{}", cmd_frontier(&c.config(None)?)?.display()),
        Command::Backtest {
            common,
            weights,
            portfolio,
        } => {
            let kind = match portfolio {
                Portfolio::Ewp => PortfolioKind::Ewp,
                Portfolio::Mrp => PortfolioKind::Mrp,
                Portfolio::Orp => PortfolioKind::Orp,
            };
            let (report, path) = cmd_backtest(&common.config(None)?, &weights, kind)?;
            println!(
                "{}: {}% holding return",
                path.display(),
                fmt_pct(report.holding_return)
            );
        }
        Command::Pipeline { common, all: None } => {
            let out = cmd_pipeline(&common.config(None)?)?;
            let r = &out.result;
            println!(
                "{}: EWP {}%, ORP {}%, winner {}",
                r.sector,
                fmt_pct(r.ewp_test_return),
                fmt_pct(r.orp_test_return),
                r.winner
            );
        }
        Command::Pipeline {
            common,
            all: Some(dir),
        } => {
            let template = common.config(Some(PathBuf::new()))?;
            let (table, _) = cmd_pipeline_all(&dir, &template)?;
            for r in &table.rows {
                println!("{}: winner {}", r.sector, r.winner);
            }
            println!("{}", table.footer());
        }
        Command::Summary { results, out } => {
            let mut rows = Vec::new();
            for path in &results {
                let f = fs::File::open(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
                rows.extend(
                    read_sector_results(f).map_err(|e| anyhow!("{}: {e}", path.display()))?,
                );
            }
            let (table, path) = write_summary(&rows, &out)?;
            println!("{}: {}", path.display(), table.footer());
        }
        Command::Fetch {
            universe,
            out,
            suffix,
            range,
        } => {
            let u = UniverseConfig::from_path(&universe)?;
            let range = match range {
                Some(r) => r,
                None => DateRange::new(u.train.start, u.test.end)?,
            };
            let series = u
                .tickers
                .par_iter()
                .map(|t| {
                    let rows =
                        fetch::fetch_closes(&format!("{t}{suffix}"), range.start, range.end)?;
                    eprintln!("{t}: {} closes", rows.len());
                    Ok((t.clone(), rows))
                })
                .collect::<Result<Vec<_>>>()?;
            let file = fs::File::create(&out).map_err(|e| anyhow!("{}: {e}", out.display()))?;
            fetch::write_long_csv(&series, std::io::BufWriter::new(file))?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sectorfolio: error: {e}");
            ExitCode::FAILURE
        }
    }
}
