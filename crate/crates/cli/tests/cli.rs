use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chrono::{Datelike, Duration, NaiveDate, Weekday};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sectorfolio"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Four tickers on weekdays of 2020-2021 with a deterministic wobble.
fn write_fixture(dir: &Path) {
    let mut csv = String::from("date,ticker,close\n");
    let mut d = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2021, 6, 30).unwrap();
    let mut t = 0.0f64;
    while d <= end {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            for (i, name) in ["AAA", "BBB", "CCC", "DDD"].iter().enumerate() {
                let k = i as f64 + 1.0;
                let p = 100.0 * k * (1.0 + 0.0004 * k * t) * (1.0 + 0.03 * (t * 0.37 * k).sin());
                writeln!(csv, "{d},{name},{p}").unwrap();
            }
            t += 1.0;
        }
        d += Duration::days(1);
    }
    fs::write(dir.join("prices.csv"), csv).unwrap();
    fs::write(
        dir.join("u.toml"),
        "sector = \"Toy\"\ntickers = [\"AAA\", \"BBB\", \"CCC\", \"DDD\"]\n\
         train = { start = \"2020-01-01\", end = \"2020-12-31\" }\n\
         test = { start = \"2021-01-01\", end = \"2021-06-30\" }\n",
    )
    .unwrap();
}

#[test]
fn pipeline_then_backtest_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    let o = run(&[
        "pipeline",
        "--universe",
        &p("u.toml"),
        "--prices",
        &p("prices.csv"),
        "--samples",
        "500",
        "--seed",
        "3",
        "--out",
        &p("out"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("Toy: EWP "));
    for f in [
        "stats.csv",
        "weights.csv",
        "frontier.csv",
        "backtest_ewp.csv",
        "backtest_orp.csv",
        "sector_result.csv",
    ] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let header = fs::read_to_string(dir.path().join("out/frontier.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "risk,return,sharpe,AAA,BBB,CCC,DDD,flag"
    );

    let o = run(&[
        "backtest",
        "--universe",
        &p("u.toml"),
        "--prices",
        &p("prices.csv"),
        "--weights",
        &p("out/weights.csv"),
        "--portfolio",
        "mrp",
        "--out",
        &p("bt"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("bt/backtest_mrp.csv").is_file());

    let o = run(&["summary", &p("out/sector_result.csv"), "--out", &p("sum")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sum/summary.csv")).unwrap();
    assert!(text.starts_with("sector,ewp_return_pct,orp_return_pct,winner\nToy,"));
    assert!(text.lines().last().unwrap().starts_with("# EWP wins: "));
}

#[test]
fn stats_weights_frontier_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    for (cmd, file) in [
        ("stats", "stats.csv"),
        ("weights", "weights.csv"),
        ("frontier", "frontier.csv"),
    ] {
        let o = run(&[
            cmd,
            "--universe",
            &p("u.toml"),
            "--prices",
            &p("prices.csv"),
            "--samples",
            "200",
            "--train",
            "2020-03-01:2020-12-31",
            "--out",
            &p("o"),
        ]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        assert!(dir.path().join("o").join(file).is_file());
    }
    let stats = fs::read_to_string(dir.path().join("o/stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 5);
}

#[test]
fn missing_price_file_fails_with_one_line_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let u = dir.path().join("u.toml");
    let o = run(&[
        "stats",
        "--universe",
        u.to_str().unwrap(),
        "--prices",
        "/no/such/prices.csv",
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("/no/such/prices.csv"), "{err}");
}

#[test]
fn bad_window_and_unknown_ticker_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    let o = run(&[
        "stats",
        "--universe",
        &p("u.toml"),
        "--prices",
        &p("prices.csv"),
        "--train",
        "2020-12-31:2020-01-01",
    ]);
    assert!(!o.status.success());

    fs::write(
        dir.path().join("bad.toml"),
        "sector = \"Bad\"\ntickers = [\"AAA\", \"ZZZ\"]\n\
         train = { start = \"2020-01-01\", end = \"2020-12-31\" }\n\
         test = { start = \"2021-01-01\", end = \"2021-06-30\" }\n",
    )
    .unwrap();
    let o = run(&[
        "pipeline",
        "--universe",
        &p("bad.toml"),
        "--prices",
        &p("prices.csv"),
        "--out",
        &p("x"),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("ZZZ"), "{}", stderr(&o));
}

#[test]
fn summary_needs_results() {
    let o = run(&["summary"]);
    assert!(!o.status.success());
}
