//! Synthetic market generator behind the bundled fixtures and the
//! full-scale proxy used when no real price snapshot is available.
//!
//! Daily returns follow a four-factor model: a market factor scaled by a
//! per-stock beta, three macro factors whose loadings are shared within a
//! sector (plus a per-stock perturbation), and independent noise. Regression
//! targets are planted on top of a trained embedding so that its dimensions
//! carry known signal.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ingest::ChangePanel;
use crate::sgns::Embedding;
use crate::stats::{pca, Matrix};

/// GICS sectors with their constituent counts in a 505-stock index.
pub const SP500_SECTORS: [(&str, usize); 11] = [
    ("Consumer Discretionary", 84),
    ("Consumer Staples", 34),
    ("Energy", 32),
    ("Financials", 68),
    ("Health Care", 61),
    ("Industrials", 67),
    ("Information Technology", 70),
    ("Materials", 25),
    ("Real Estate", 33),
    ("Telecommunication Services", 3),
    ("Utilities", 28),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub sectors: Vec<(String, usize)>,
    pub n_days: usize,
    pub start: NaiveDate,
    pub seed: u64,
    pub market_vol: f64,
    pub factor_vol: f64,
    pub idio_vol: f64,
    /// Number of macro factors besides the market.
    pub n_factors: usize,
    /// Spread of each stock's factor loadings around its sector's.
    pub loading_noise: f64,
    /// Every `late_listing_every`-th ticker starts trading `late_listing_days` late (0 disables).
    pub late_listing_every: usize,
    pub late_listing_days: usize,
}

impl MarketSpec {
    /// 505 tickers over about five years of trading days.
    pub fn sp500_like(seed: u64) -> Self {
        Self {
            sectors: SP500_SECTORS.iter().map(|(s, n)| (s.to_string(), *n)).collect(),
            n_days: 1259,
            start: NaiveDate::from_ymd_opt(2013, 2, 8).expect("valid date"),
            seed,
            market_vol: 0.008,
            factor_vol: 0.006,
            idio_vol: 0.012,
            n_factors: 3,
            loading_noise: 0.35,
            late_listing_every: 0,
            late_listing_days: 0,
        }
    }

    /// The smaller market shipped in `fixtures/`.
    pub fn bundled() -> Self {
        Self {
            sectors: SP500_SECTORS
                .iter()
                .map(|(s, n)| (s.to_string(), (n / 4).max(3)))
                .collect(),
            n_days: 300,
            late_listing_every: 25,
            late_listing_days: 40,
            ..Self::sp500_like(2013)
        }
    }

    pub fn n_tickers(&self) -> usize {
        self.sectors.iter().map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub tickers: Vec<String>,
    pub sectors: Vec<String>,
    pub names: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// `[day][ticker]`, `None` before a late listing.
    pub opens: Vec<Vec<Option<f64>>>,
    pub closes: Vec<Vec<Option<f64>>>,
}

/// Three-letter symbols in order: `AAB`, `AAC`, ... (skipping `AAA`).
fn symbol(i: usize) -> String {
    let n = i + 1;
    let letters = [n / 676 % 26, n / 26 % 26, n % 26];
    letters.iter().map(|&d| (b'A' + d as u8) as char).collect()
}

/// Weekdays from `start`.
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Unit-length sector loading directions in `dim` factors. Three factors use
/// a Fibonacci lattice on the sphere; other counts draw random directions.
fn sector_loadings(k: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        return (0..k)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..k)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

pub fn generate_market(spec: &MarketSpec) -> SyntheticMarket {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_tickers();
    let centers = sector_loadings(spec.sectors.len(), spec.n_factors, spec.seed);

    let mut tickers = Vec::with_capacity(n);
    let mut sectors = Vec::with_capacity(n);
    let mut loadings = Vec::with_capacity(n);
    let mut betas = Vec::with_capacity(n);
    for (s, (sector, count)) in spec.sectors.iter().enumerate() {
        for _ in 0..*count {
            tickers.push(symbol(tickers.len()));
            sectors.push(sector.clone());
            let mut l = centers[s].clone();
            for v in &mut l {
                *v += spec.loading_noise * rng.sample::<f64, _>(StandardNormal);
            }
            loadings.push(l);
            betas.push(rng.random_range(0.5..1.5));
        }
    }
    let names = tickers.iter().map(|t| format!("{t} Holdings")).collect();

    let dates = trading_days(spec.start, spec.n_days);
    let listing: Vec<usize> = (0..n)
        .map(|i| {
            if spec.late_listing_every > 0 && i % spec.late_listing_every == spec.late_listing_every - 1 {
                spec.late_listing_days.min(spec.n_days)
            } else {
                0
            }
        })
        .collect();
    let overnight = Normal::new(0.0, 0.002).expect("valid normal");
    let mut last: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..200.0)).collect();
    let mut opens = Vec::with_capacity(spec.n_days);
    let mut closes = Vec::with_capacity(spec.n_days);
    for t in 0..spec.n_days {
        let market: f64 = rng.sample(StandardNormal);
        let factors: Vec<f64> = (0..spec.n_factors).map(|_| rng.sample(StandardNormal)).collect();
        let mut o_row = Vec::with_capacity(n);
        let mut c_row = Vec::with_capacity(n);
        for i in 0..n {
            let eps: f64 = rng.sample(StandardNormal);
            let g = overnight.sample(&mut rng);
            if t < listing[i] {
                o_row.push(None);
                c_row.push(None);
                continue;
            }
            let exposure: f64 = loadings[i].iter().zip(&factors).map(|(l, f)| l * f).sum();
            let r = spec.market_vol * betas[i] * market + spec.factor_vol * exposure + spec.idio_vol * eps;
            let open = last[i] * (1.0 + g);
            let close = open * (1.0 + r);
            last[i] = close;
            o_row.push(Some(open));
            c_row.push(Some(close));
        }
        opens.push(o_row);
        closes.push(c_row);
    }
    SyntheticMarket {
        tickers,
        sectors,
        names,
        dates,
        opens,
        closes,
    }
}

impl SyntheticMarket {
    /// Panel of exact relative changes, bypassing CSV rounding.
    pub fn to_panel(&self) -> ChangePanel {
        let mut order: Vec<usize> = (0..self.tickers.len()).collect();
        order.sort_by(|&a, &b| self.tickers[a].cmp(&self.tickers[b]));
        let cells = self
            .opens
            .iter()
            .zip(&self.closes)
            .flat_map(|(o, c)| {
                order.iter().map(move |&i| match (o[i], c[i]) {
                    (Some(o), Some(c)) => Some((c - o) / o),
                    _ => None,
                })
            })
            .collect();
        ChangePanel::from_parts(
            order.iter().map(|&i| self.tickers[i].clone()).collect(),
            order.iter().map(|&i| self.sectors[i].clone()).collect(),
            self.dates.clone(),
            cells,
        )
    }

    /// `date,open,high,low,close,volume,Name`, grouped by ticker like the
    /// public five-year snapshot.
    pub fn write_prices<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,open,high,low,close,volume,Name")?;
        for (i, ticker) in self.tickers.iter().enumerate() {
            for (t, date) in self.dates.iter().enumerate() {
                if let (Some(o), Some(c)) = (self.opens[t][i], self.closes[t][i]) {
                    let (o, c) = (round4(o), round4(c));
                    let volume = 1_000_000 + (i * 7919 + t * 104_729) % 5_000_000;
                    writeln!(
                        out,
                        "{date},{o:.4},{:.4},{:.4},{c:.4},{volume},{ticker}",
                        o.max(c) * 1.003,
                        o.min(c) * 0.997
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn write_companies<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["Symbol", "Name", "Sector"])?;
        for ((t, n), s) in self.tickers.iter().zip(&self.names).zip(&self.sectors) {
            w.write_record([t, n, s])?;
        }
        w.flush()
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Column-wise z-scores of the embedding rows for `tickers`.
fn standardized_dims(e: &Embedding, tickers: &[&str]) -> Vec<Vec<f64>> {
    let d = e.dim();
    let rows: Vec<&[f64]> = tickers.iter().map(|t| e.vector(t).expect("ticker in embedding")).collect();
    let n = rows.len() as f64;
    let mut out = vec![vec![0.0; d]; rows.len()];
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let sd = (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
        for (o, r) in out.iter_mut().zip(&rows) {
            o[j] = if sd > 0.0 { (r[j] - mean) / sd } else { 0.0 };
        }
    }
    out
}

/// Unit-variance planted signal: a weighted sum of the standardized
/// embedding columns, each weight signed like the column's loading on the
/// first principal component.
///
/// The columns of an SGNS embedding are far from independent (one direction
/// is nearly constant across tokens, so the centered vectors span one
/// dimension fewer than the embedding). With arbitrary signs the planted
/// effects of correlated columns cancel; along the leading component every
/// column carries the signal.
fn planted_signal(z: &[Vec<f64>], magnitudes: &[f64]) -> Vec<f64> {
    let x = Matrix::from_rows(z);
    let weights: Vec<f64> = match pca(&x, true) {
        Ok(r) => (0..magnitudes.len())
            .map(|j| if r.components[(j, 0)] < 0.0 { -magnitudes[j] } else { magnitudes[j] })
            .collect(),
        Err(_) => magnitudes.to_vec(),
    };
    let raw: Vec<f64> = z.iter().map(|r| r.iter().zip(&weights).map(|(a, b)| a * b).sum()).collect();
    zscore(&raw)
}

fn zscore(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    v.iter().map(|x| (x - mean) / sd).collect()
}

/// Planted regression targets: an employee count driven mostly by the
/// embedding with a weak market-cap effect, and an ESG risk score with three
/// weak baseline covariates. A few rows name tickers outside the market.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTargets {
    pub employees_csv: String,
    pub esg_csv: String,
}

const UNKNOWN_TICKERS: [&str; 3] = ["ZZXA", "ZZXB", "ZZXC"];

pub fn plant_targets(e: &Embedding, seed: u64) -> PlantedTargets {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tickers: Vec<&str> = e.vocabulary().iter().map(String::as_str).collect();
    let dims = standardized_dims(e, &tickers);
    let n = tickers.len();
    let cap_dist = LogNormal::new(3.0, 0.8).expect("valid lognormal");
    let caps: Vec<f64> = (0..n).map(|_| cap_dist.sample(&mut rng)).collect();
    let cap_z = zscore(&caps);

    // baseline effects stay small next to the embedding signal (about 0.15
    // of its standard deviation); see the note on `planted_signal`
    let signal = planted_signal(&dims, &[1.2, 1.0, 1.1, 0.9]);
    let mut employees = String::from("Ticker,Employees,MarketCap\n");
    for i in 0..n {
        let noise: f64 = rng.sample::<f64, _>(StandardNormal) * 3600.0;
        let count = (40_000.0 + 9000.0 * signal[i] + 1350.0 * cap_z[i] + noise).max(500.0).round();
        employees.push_str(&format!("{},{count},{:.3}\n", tickers[i], caps[i]));
    }
    for t in UNKNOWN_TICKERS {
        let cap = cap_dist.sample(&mut rng);
        employees.push_str(&format!("{t},{},{cap:.3}\n", rng.random_range(1000..90_000)));
    }

    let signal = planted_signal(&dims, &[1.0, 1.1, 0.9, 1.2]);
    let mut esg = String::from("ticker,ESG_Risk,Controversy,Leverage,Float\n");
    for i in 0..n {
        // roughly one company in ten is not rated
        if rng.random_range(0..10) == 0 {
            continue;
        }
        let x: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let noise: f64 = rng.sample::<f64, _>(StandardNormal) * 1.6;
        let score = 24.0 + 4.0 * signal[i] + 0.6 * x[0] + 0.3 * x[1] - 0.2 * x[2] + noise;
        esg.push_str(&format!(
            "{},{score:.2},{:.3},{:.3},{:.3}\n",
            tickers[i],
            x[0] + 2.0,
            1.5 + 0.4 * x[1],
            60.0 + 10.0 * x[2]
        ));
    }
    for t in UNKNOWN_TICKERS {
        esg.push_str(&format!("{t},{:.2},2.000,1.500,60.000\n", rng.random_range(10.0..40.0)));
    }
    PlantedTargets {
        employees_csv: employees,
        esg_csv: esg,
    }
}

/// File names of the bundle, relative to its directory.
pub const BUNDLE_FILES: [&str; 5] = ["prices.csv", "companies.csv", "employees.csv", "esg.csv", "config.json"];

/// Write the market CSVs, then call `embed` on the written directory to get
/// the embedding the targets are planted on, then write targets and config.
pub fn write_bundle<F, E>(dir: &Path, spec: &MarketSpec, config_json: &str, embed: F) -> Result<Vec<PathBuf>, E>
where
    F: FnOnce(&Path) -> Result<Embedding, E>,
    E: From<std::io::Error>,
{
    fs::create_dir_all(dir)?;
    let market = generate_market(spec);
    let mut prices = Vec::new();
    market.write_prices(&mut prices)?;
    fs::write(dir.join(BUNDLE_FILES[0]), prices)?;
    let mut companies = Vec::new();
    market.write_companies(&mut companies)?;
    fs::write(dir.join(BUNDLE_FILES[1]), companies)?;
    fs::write(dir.join(BUNDLE_FILES[4]), config_json)?;

    let embedding = embed(dir)?;
    let targets = plant_targets(&embedding, spec.seed.wrapping_add(1));
    fs::write(dir.join(BUNDLE_FILES[2]), targets.employees_csv)?;
    fs::write(dir.join(BUNDLE_FILES[3]), targets.esg_csv)?;
    Ok(BUNDLE_FILES.iter().map(|f| dir.join(f)).collect())
}
