//! Monte Carlo efficient frontier: random long-only portfolios, the
//! minimum-risk (leftmost) sample and the maximum-Sharpe sample.
//!
//! Sample `i` draws from its own ChaCha stream `(seed, i)`, so a cloud is
//! identical whatever the rayon thread count.

use std::io::{Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::portfolio::{
    annual_risk, quadratic_form, sharpe_ratio, AnnualReturns, RiskFreeRate, WeightVector,
};
use crate::return_stats::CovarianceMatrix;

pub const DEFAULT_SAMPLES: usize = 10_000;

/// Draws one point of the unit simplex into `out`.
pub trait WeightSampler: Sync {
    fn draw(&self, rng: &mut dyn RngCore, out: &mut [f64]);
}

/// Independent U(0,1) variates divided by their sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformNormalized;

impl WeightSampler for UniformNormalized {
    fn draw(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        loop {
            out.iter_mut().for_each(|x| *x = rng.random::<f64>());
            let sum: f64 = out.iter().sum();
            if sum > 0.0 {
                out.iter_mut().for_each(|x| *x /= sum);
                return;
            }
        }
    }
}

/// Uniform on the simplex, i.e. Dirichlet(1, ..., 1), via normalized
/// exponential variates.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatDirichlet;

impl WeightSampler for FlatDirichlet {
    fn draw(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        loop {
            // 1 - U lies in (0, 1], so the log is finite.
            out.iter_mut()
                .for_each(|x| *x = -(1.0 - rng.random::<f64>()).ln());
            let sum: f64 = out.iter().sum();
            if sum > 0.0 {
                out.iter_mut().for_each(|x| *x /= sum);
                return;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierSample {
    pub weights: WeightVector,
    pub annual_return: f64,
    pub annual_risk: f64,
    /// NaN when `annual_risk` is zero.
    pub sharpe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCloud {
    tickers: Vec<String>,
    samples: Vec<FrontierSample>,
    seed: u64,
    rf: RiskFreeRate,
}

impl FrontierCloud {
    /// Assembles a cloud from already-computed samples.
    pub fn from_samples(
        tickers: Vec<String>,
        samples: Vec<FrontierSample>,
        seed: u64,
        rf: RiskFreeRate,
    ) -> Result<Self> {
        if let Some(s) = samples
            .iter()
            .find(|s| s.weights.tickers() != tickers.as_slice())
        {
            return Err(Error::Alignment(format!(
                "sample tickers [{}] differ from cloud tickers [{}]",
                s.weights.tickers().join(", "),
                tickers.join(", ")
            )));
        }
        Ok(Self {
            tickers,
            samples,
            seed,
            rf,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn samples(&self) -> &[FrontierSample] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rf(&self) -> RiskFreeRate {
        self.rf
    }
}

/// Samples `n_samples` random portfolios with [`UniformNormalized`] weights.
pub fn sample_frontier(
    mu: &AnnualReturns,
    cov: &CovarianceMatrix,
    n_samples: usize,
    seed: u64,
    rf: RiskFreeRate,
) -> Result<FrontierCloud> {
    sample_frontier_with(&UniformNormalized, mu, cov, n_samples, seed, rf)
}

pub fn sample_frontier_with(
    sampler: &dyn WeightSampler,
    mu: &AnnualReturns,
    cov: &CovarianceMatrix,
    n_samples: usize,
    seed: u64,
    rf: RiskFreeRate,
) -> Result<FrontierCloud> {
    if n_samples == 0 {
        return Err(Error::EmptyCloud);
    }
    if mu.tickers() != cov.tickers() {
        return Err(Error::Alignment(format!(
            "return tickers [{}] do not match covariance tickers [{}]",
            mu.tickers().join(", "),
            cov.tickers().join(", ")
        )));
    }
    let tickers = mu.tickers().to_vec();
    if tickers.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut w = vec![0.0; tickers.len()];
            sampler.draw(&mut rng, &mut w);
            let weights = WeightVector::normalized(tickers.clone(), w)?;
            let annual_return = weights
                .weights()
                .iter()
                .zip(mu.values())
                .map(|(a, b)| a * b)
                .sum();
            let risk = annual_risk(quadratic_form(weights.weights(), cov));
            Ok(FrontierSample {
                weights,
                annual_return,
                annual_risk: risk,
                sharpe: sharpe_ratio(annual_return, risk, rf).unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrontierCloud {
        tickers,
        samples,
        seed,
        rf,
    })
}

/// Index of the sample with the smallest annual risk; first one wins ties.
pub fn min_risk_index(cloud: &FrontierCloud) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in cloud.samples.iter().enumerate() {
        match best {
            Some(b) if s.annual_risk >= cloud.samples[b].annual_risk => {}
            _ => best = Some(i),
        }
    }
    best.ok_or(Error::EmptyCloud)
}

/// Index of the sample with the largest Sharpe ratio; first one wins ties.
pub fn optimum_risk_index(cloud: &FrontierCloud) -> Result<usize> {
    if cloud.samples.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if let Some(i) = cloud
        .samples
        .iter()
        .position(|s| s.annual_risk.is_nan() || s.annual_risk <= 0.0)
    {
        return Err(Error::DegenerateSample(i));
    }
    let mut best = 0;
    for (i, s) in cloud.samples.iter().enumerate().skip(1) {
        if s.sharpe > cloud.samples[best].sharpe {
            best = i;
        }
    }
    Ok(best)
}

/// The leftmost point of the cloud.
pub fn min_risk_portfolio(cloud: &FrontierCloud) -> Result<&FrontierSample> {
    min_risk_index(cloud).map(|i| &cloud.samples[i])
}

/// The maximum-Sharpe point of the cloud.
pub fn optimum_risk_portfolio(cloud: &FrontierCloud) -> Result<&FrontierSample> {
    optimum_risk_index(cloud).map(|i| &cloud.samples[i])
}

pub const FLAG_MRP: &str = "MRP";
pub const FLAG_ORP: &str = "ORP";

/// One parsed row of an exported frontier file.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub risk: f64,
    pub annual_return: f64,
    pub sharpe: f64,
    pub weights: Vec<f64>,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierTable {
    pub tickers: Vec<String>,
    pub rows: Vec<FrontierRow>,
}

/// Writes `risk,return,sharpe,<ticker weights...>,flag`, one row per sample.
/// The flag column holds `MRP`, `ORP`, `MRP+ORP` or nothing.
pub fn export_frontier<W: Write>(cloud: &FrontierCloud, out: W) -> Result<()> {
    let mrp = min_risk_index(cloud)?;
    let orp = optimum_risk_index(cloud).ok();
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["risk".to_string(), "return".into(), "sharpe".into()];
    header.extend(cloud.tickers.iter().cloned());
    header.push("flag".into());
    wtr.write_record(&header)?;
    for (i, s) in cloud.samples.iter().enumerate() {
        let mut rec = vec![
            fmt_sig(s.annual_risk),
            fmt_sig(s.annual_return),
            fmt_sig(s.sharpe),
        ];
        rec.extend(s.weights.weights().iter().map(|w| fmt_sig(*w)));
        let flag = match (i == mrp, Some(i) == orp) {
            (true, true) => format!("{FLAG_MRP}+{FLAG_ORP}"),
            (true, false) => FLAG_MRP.to_string(),
            (false, true) => FLAG_ORP.to_string(),
            (false, false) => String::new(),
        };
        rec.push(flag);
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_frontier<R: Read>(input: R) -> Result<FrontierTable> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let n = header.len();
    if n < 4
        || &header[0] != "risk"
        || &header[1] != "return"
        || &header[2] != "sharpe"
        || &header[n - 1] != "flag"
    {
        return Err(Error::format(1, "not a frontier file"));
    }
    let tickers: Vec<String> = header
        .iter()
        .skip(3)
        .take(n - 4)
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse()
                .map_err(|_| Error::format(line, format!("bad number {:?}", &rec[k])))
        };
        rows.push(FrontierRow {
            risk: num(0)?,
            annual_return: num(1)?,
            sharpe: num(2)?,
            weights: (3..n - 1).map(num).collect::<Result<_>>()?,
            flag: rec[n - 1].to_string(),
        });
    }
    Ok(FrontierTable { tickers, rows })
}
