mod common;

use std::fs;
use std::path::Path;

use sectorfolio::backtest::read_backtest_csv;
use sectorfolio::frontier::read_frontier;
use sectorfolio::report::*;
use sectorfolio::Error;

use common::*;

/// Writes a 6-ticker universe with two years of training and half a year of
/// test closes; returns the run config.
fn write_fixture(dir: &Path, seed: u64) -> RunConfig {
    let train = business_days(ymd(2019, 1, 1), ymd(2020, 12, 31));
    let test = business_days(ymd(2021, 1, 1), ymd(2021, 6, 30));
    let all: Vec<_> = train.into_iter().chain(test).collect();
    let cols = synthetic_closes(6, all.len(), seed);
    let tickers: Vec<String> = ["AAA", "BBB", "CCC", "DDD", "EEE", "FFF"]
        .map(String::from)
        .to_vec();
    let series: Vec<_> = tickers
        .iter()
        .zip(cols)
        .map(|(t, c)| (t.clone(), all.clone(), c))
        .collect();
    fs::write(dir.join("prices.csv"), long_csv(&series)).unwrap();
    fs::write(
        dir.join("fixture.toml"),
        "sector = \"Fixture & Co\"\n\
         tickers = [\"AAA\", \"BBB\", \"CCC\", \"DDD\", \"EEE\", \"FFF\"]\n\
         train = { start = \"2019-01-01\", end = \"2020-12-31\" }\n\
         test = { start = \"2021-01-01\", end = \"2021-06-30\" }\n",
    )
    .unwrap();
    let mut cfg = RunConfig::new(
        dir.join("fixture.toml"),
        dir.join("prices.csv"),
        dir.join("out"),
    );
    cfg.samples = 3_000;
    cfg.seed = 42;
    cfg
}

#[test]
fn pipeline_writes_every_artifact_and_they_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_fixture(dir.path(), 3);
    let out = cmd_pipeline(&cfg).unwrap();
    for f in [
        STATS_FILE,
        CORRELATION_FILE,
        WEIGHTS_FILE,
        PORTFOLIOS_FILE,
        FRONTIER_FILE,
        BACKTEST_EWP_FILE,
        BACKTEST_ORP_FILE,
        SECTOR_RESULT_FILE,
        EXCLUSIONS_FILE,
    ] {
        assert!(cfg.out_dir.join(f).is_file(), "{f} missing");
    }
    let open = |f: &str| fs::File::open(cfg.out_dir.join(f)).unwrap();

    let weights = read_weights_csv(open(WEIGHTS_FILE)).unwrap();
    for (a, b) in weights
        .orp
        .weights()
        .iter()
        .zip(out.analysis.orp().weights())
    {
        assert!((a - b).abs() < 1e-6);
    }
    let frontier = read_frontier(open(FRONTIER_FILE)).unwrap();
    assert_eq!(frontier.rows.len(), 3_000);

    let ewp = read_backtest_csv(open(BACKTEST_EWP_FILE)).unwrap();
    assert!((ewp.holding_return - out.ewp_backtest.holding_return).abs() <= 0.5e-4 + 1e-12);
    let results = read_sector_results(open(SECTOR_RESULT_FILE)).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].sector, out.result.sector);
    assert_eq!(results[0].winner, out.result.winner);
    assert!((results[0].ewp_test_return - out.result.ewp_test_return).abs() <= 1e-12);
    assert!((results[0].orp_test_return - out.result.orp_test_return).abs() <= 1e-12);
    assert_eq!(
        fs::read_to_string(cfg.out_dir.join(EXCLUSIONS_FILE)).unwrap(),
        "no tickers excluded\n"
    );

    let stats = read_stats_csv(open(STATS_FILE)).unwrap();
    for (row, s) in stats.iter().zip(&out.analysis.stats) {
        assert!((row.1 - s.annual_return).abs() < 0.5e-4 + 1e-12);
    }
}

#[test]
fn pipeline_output_is_a_pure_function_of_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_fixture(dir.path(), 8);
    cmd_pipeline(&cfg).unwrap();
    let first: Vec<_> = [FRONTIER_FILE, WEIGHTS_FILE, BACKTEST_ORP_FILE]
        .iter()
        .map(|f| fs::read(cfg.out_dir.join(f)).unwrap())
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    pool.install(|| cmd_pipeline(&cfg).unwrap());
    for (f, bytes) in [FRONTIER_FILE, WEIGHTS_FILE, BACKTEST_ORP_FILE]
        .iter()
        .zip(first)
    {
        assert_eq!(fs::read(cfg.out_dir.join(f)).unwrap(), bytes, "{f} changed");
    }
}

#[test]
fn backtest_command_uses_weights_file_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_fixture(dir.path(), 21);
    let out = cmd_pipeline(&cfg).unwrap();
    let (report, path) =
        cmd_backtest(&cfg, &cfg.out_dir.join(WEIGHTS_FILE), PortfolioKind::Ewp).unwrap();
    assert!(path.ends_with(BACKTEST_EWP_FILE));
    assert!((report.holding_return - out.ewp_backtest.holding_return).abs() < 1e-12);
}

#[test]
fn fixed_slots_leave_excluded_share_uninvested() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = write_fixture(dir.path(), 4);
    cfg.ewp_allocation = EwpAllocation::FixedSlots;
    let simplex = {
        let mut c = cfg.clone();
        c.ewp_allocation = EwpAllocation::Simplex;
        c.out_dir = dir.path().join("simplex");
        cmd_pipeline(&c).unwrap()
    };
    // With nothing excluded the two modes coincide.
    let fixed = cmd_pipeline(&cfg).unwrap();
    assert!(
        (fixed.ewp_backtest.holding_return - simplex.ewp_backtest.holding_return).abs() < 1e-12
    );
    assert!((fixed.ewp_backtest.initial_capital - DEFAULT_CAPITAL).abs() < 1e-6);
}

#[test]
fn run_all_summarizes_every_universe() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_fixture(dir.path(), 5);
    let universes = dir.path().join("universes");
    fs::create_dir(&universes).unwrap();
    let base = fs::read_to_string(&cfg.universe_path).unwrap();
    fs::write(
        universes.join("a.toml"),
        base.replace("Fixture & Co", "Alpha"),
    )
    .unwrap();
    fs::write(
        universes.join("b.toml"),
        base.replace("Fixture & Co", "Beta")
            .replace(", \"FFF\"", ""),
    )
    .unwrap();
    let (table, outputs) = cmd_pipeline_all(&universes, &cfg).unwrap();
    assert_eq!(outputs.len(), 2);
    assert_eq!(table.rows[0].sector, "Alpha");
    assert_eq!(table.rows[1].sector, "Beta");
    assert!(cfg.out_dir.join("alpha").join(WEIGHTS_FILE).is_file());
    let text = fs::read_to_string(cfg.out_dir.join(SUMMARY_FILE)).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# EWP wins: "));
    assert_eq!(
        SummaryTable::read_csv(text.as_bytes()).unwrap().rows.len(),
        2
    );
}

#[test]
fn failures_name_the_stage_and_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = write_fixture(dir.path(), 6);
    cfg.prices_path = dir.path().join("nope.csv");
    let e = cmd_pipeline(&cfg).unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("load") && msg.contains("nope.csv"), "{msg}");

    let cfg = write_fixture(dir.path(), 6);
    let mut short = cfg.clone();
    short.train = Some("2019-01-01:2019-01-02".parse().unwrap());
    match cmd_pipeline(&short) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "stats"),
        other => panic!("unexpected {other:?}"),
    }
}
