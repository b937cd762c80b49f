//! Daily closes from the Yahoo Finance chart endpoint, written as a long
//! `date,ticker,close` CSV that the rest of the toolkit reads.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, NaiveDate};
use serde::Deserialize;

const CHART_URL: &str = "https://query1.finance.yahoo.com/v8/finance/chart/";

#[derive(Debug, Deserialize)]
struct ChartResponse {
    chart: Chart,
}

#[derive(Debug, Deserialize)]
struct Chart {
    result: Option<Vec<ChartResult>>,
    error: Option<ChartError>,
}

#[derive(Debug, Deserialize)]
struct ChartError {
    code: String,
    description: String,
}

#[derive(Debug, Deserialize)]
struct ChartResult {
    meta: Meta,
    #[serde(default)]
    timestamp: Vec<i64>,
    indicators: Indicators,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Meta {
    #[serde(default)]
    gmtoffset: i64,
}

#[derive(Debug, Deserialize)]
struct Indicators {
    quote: Vec<Quote>,
}

#[derive(Debug, Deserialize)]
struct Quote {
    #[serde(default)]
    close: Vec<Option<f64>>,
}

/// Parses a chart response into exchange-local dates and closes. Days with a
/// null close are dropped.
pub fn parse_chart(json: &str) -> Result<Vec<(NaiveDate, f64)>> {
    let resp: ChartResponse = serde_json::from_str(json).context("malformed chart response")?;
    if let Some(e) = resp.chart.error {
        bail!("{}: {}", e.code, e.description);
    }
    let result = resp
        .chart
        .result
        .and_then(|r| r.into_iter().next())
        .ok_or_else(|| anyhow!("chart response has no result"))?;
    let closes = result
        .indicators
        .quote
        .into_iter()
        .next()
        .map(|q| q.close)
        .unwrap_or_default();
    if closes.len() != result.timestamp.len() {
        bail!(
            "{} timestamps but {} closes",
            result.timestamp.len(),
            closes.len()
        );
    }
    // One close per exchange-local day; a later print of the same day wins.
    let mut by_day = BTreeMap::new();
    for (ts, close) in result.timestamp.iter().zip(closes) {
        let Some(close) = close.filter(|c| c.is_finite() && *c > 0.0) else {
            continue;
        };
        let local = DateTime::from_timestamp(ts + result.meta.gmtoffset, 0)
            .ok_or_else(|| anyhow!("timestamp {ts} out of range"))?;
        by_day.insert(local.date_naive(), close);
    }
    Ok(by_day.into_iter().collect())
}

fn encode_symbol(symbol: &str) -> String {
    symbol
        .bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'^' => {
                (b as char).to_string()
            }
            _ => format!("%{b:02X}"),
        })
        .collect()
}

fn day_start(d: NaiveDate) -> i64 {
    d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp()
}

pub fn fetch_closes(
    symbol: &str,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<(NaiveDate, f64)>> {
    let url = format!("{CHART_URL}{}", encode_symbol(symbol));
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into();
    let body = agent
        .get(&url)
        .query("period1", day_start(start).to_string())
        .query("period2", (day_start(end) + 86_400).to_string())
        .query("interval", "1d")
        .header("User-Agent", "Mozilla/5.0 sectorfolio")
        .call()
        .map_err(|e| anyhow!("{symbol}: request failed: {e}"))?
        .body_mut()
        .read_to_string()
        .map_err(|e| anyhow!("{symbol}: reading response failed: {e}"))?;
    let rows = parse_chart(&body).map_err(|e| anyhow!("{symbol}: {e:#}"))?;
    Ok(rows
        .into_iter()
        .filter(|(d, _)| *d >= start && *d <= end)
        .collect())
}

pub fn write_long_csv<W: Write>(series: &[(String, Vec<(NaiveDate, f64)>)], out: W) -> Result<()> {
    let mut out = out;
    writeln!(out, "date,ticker,close")?;
    for (ticker, rows) in series {
        for (d, c) in rows {
            writeln!(out, "{d},{ticker},{}", sectorfolio::format::fmt_sig(*c))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"chart":{"result":[{"meta":{"currency":"INR","symbol":"M&M.NS","gmtoffset":19800},
        "timestamp":[1641181500,1641267900,1641354300,1641440700],
        "indicators":{"quote":[{"close":[830.25,null,845.5,840.0],"open":[1,2,3,4]}],
        "adjclose":[{"adjclose":[800.0,null,815.0,810.0]}]}}],"error":null}}"#;

    #[test]
    fn parses_closes_and_drops_nulls() {
        let rows = parse_chart(SAMPLE).unwrap();
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert_eq!(
            rows,
            vec![
                (d("2022-01-03"), 830.25),
                (d("2022-01-05"), 845.5),
                (d("2022-01-06"), 840.0)
            ]
        );
    }

    #[test]
    fn reports_api_errors() {
        let json = r#"{"chart":{"result":null,"error":{"code":"Not Found","description":"No data found, symbol may be delisted"}}}"#;
        let e = parse_chart(json).unwrap_err().to_string();
        assert!(e.contains("Not Found"), "{e}");
        assert!(parse_chart("{").is_err());
    }

    #[test]
    fn symbols_are_url_encoded() {
        assert_eq!(encode_symbol("M&M.NS"), "M%26M.NS");
        assert_eq!(encode_symbol("BAJAJ-AUTO.NS"), "BAJAJ-AUTO.NS");
    }

    #[test]
    fn long_csv_layout() {
        let d = NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
        let mut buf = Vec::new();
        write_long_csv(&[("M&M".into(), vec![(d, 830.25)])], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "date,ticker,close\n2022-01-03,M&M,830.25\n"
        );
    }
}
