//! Option quotes: CSV ingestion, forward and discount extraction from
//! put-call parity, the Black delta filter and synthetic surfaces.
//!
//! Quote files use the header `date,T,strike,flag,price` with `flag` in
//! `{C, P}`, dates as `YYYY-MM-DD` and `T` in ACT/365 year fractions.

use chrono::NaiveDate;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};
use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{CurveSpec, ModelParams, TenorParams};
use crate::pricing::{black_price, bs_delta, implied_vol, price_strikes, EuropeanOption, PricingGrid};
use crate::sampling::RngSpec;

pub const CSV_HEADER: [&str; 5] = ["date", "T", "strike", "flag", "price"];
pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// One closing option price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub date: NaiveDate,
    #[serde(rename = "T")]
    pub maturity: f64,
    pub strike: f64,
    pub is_call: bool,
    pub price: f64,
}

impl OptionQuote {
    fn check(&self) -> std::result::Result<(), String> {
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(format!("maturity must be > 0, got {}", self.maturity));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(format!("strike must be > 0, got {}", self.strike));
        }
        if !(self.price > 0.0 && self.price.is_finite()) {
            return Err(format!("price must be > 0, got {}", self.price));
        }
        Ok(())
    }

    /// Quote from an implied volatility, converted to a Black price.
    pub fn from_implied_vol(
        date: NaiveDate,
        maturity: f64,
        strike: f64,
        is_call: bool,
        iv: f64,
        forward: f64,
        discount: f64,
    ) -> Result<Self> {
        let opt = EuropeanOption::new(strike, maturity, is_call, forward, discount)?;
        if !(iv > 0.0) {
            return Err(Error::InvalidParameter(format!("implied vol must be > 0, got {iv}")));
        }
        Ok(OptionQuote {
            date,
            maturity,
            strike,
            is_call,
            price: black_price(&opt, iv),
        })
    }
}

/// A CSV row that failed validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub quotes: Vec<OptionQuote>,
    pub rejects: Vec<Reject>,
}

fn parse_row(rec: &csv::StringRecord) -> std::result::Result<OptionQuote, String> {
    if rec.len() != CSV_HEADER.len() {
        return Err(format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()));
    }
    let date = NaiveDate::parse_from_str(&rec[0], DATE_FORMAT).map_err(|e| format!("date '{}': {e}", &rec[0]))?;
    let num = |i: usize| {
        rec[i]
            .parse::<f64>()
            .map_err(|_| format!("{} '{}' is not a number", CSV_HEADER[i], &rec[i]))
    };
    let is_call = match &rec[3] {
        "C" => true,
        "P" => false,
        other => return Err(format!("flag must be C or P, got '{other}'")),
    };
    let q = OptionQuote {
        date,
        maturity: num(1)?,
        strike: num(2)?,
        is_call,
        price: num(4)?,
    };
    q.check()?;
    Ok(q)
}

/// Parses a quote file. Invalid rows and repeated `(date, T, strike, flag)`
/// keys are listed in `rejects`; the first occurrence of a key is kept.
pub fn ingest_quotes<R: Read>(reader: R) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Malformed(format!(
            "header must be '{}', got '{}'",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut quotes = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec) {
            Ok(q) => {
                let key = (q.date, q.maturity.to_bits(), q.strike.to_bits(), q.is_call);
                if seen.insert(key) {
                    quotes.push(q);
                } else {
                    rejects.push(Reject {
                        line,
                        reason: "duplicate (date, T, strike, flag); first occurrence kept".into(),
                    });
                }
            }
            Err(reason) => rejects.push(Reject { line, reason }),
        }
    }
    if quotes.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no valid quotes ({} rows rejected)",
            rejects.len()
        )));
    }
    Ok(Ingested { quotes, rejects })
}

/// Shortest decimal form of `x` rounded to 12 significant digits, in
/// exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_sig12(x: f64) -> String {
    let rounded = round_sig12(x);
    let a = rounded.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Writes quotes in the CSV schema with LF line endings.
pub fn write_quotes<W: Write>(mut w: W, quotes: &[OptionQuote]) -> Result<()> {
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for q in quotes {
        writeln!(
            w,
            "{},{},{},{},{}",
            q.date.format(DATE_FORMAT),
            fmt_sig12(q.maturity),
            fmt_sig12(q.strike),
            if q.is_call { "C" } else { "P" },
            fmt_sig12(q.price)
        )?;
    }
    Ok(())
}

/// Forward `F` and discount `D` from an OLS fit of `C - P = D F - D K`
/// over strikes quoted on both sides.
pub fn extract_forward_discount(quotes: &[OptionQuote]) -> Result<(f64, f64)> {
    let mut calls = BTreeMap::new();
    let mut puts = BTreeMap::new();
    for q in quotes {
        let side = if q.is_call { &mut calls } else { &mut puts };
        side.entry(q.strike.to_bits()).or_insert(q.price);
    }
    let pairs: Vec<(f64, f64)> = calls
        .iter()
        .filter_map(|(k, c)| puts.get(k).map(|p| (f64::from_bits(*k), c - p)))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "forward extraction needs >= 2 call/put pairs, found {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mk = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mk) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mk;
    let discount = -slope;
    if !(discount > 0.0 && discount <= 1.2) {
        return Err(Error::ImplausibleDiscount(discount));
    }
    let forward = intercept / discount;
    if !(forward > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "extracted forward {forward} is not positive"
        )));
    }
    Ok((forward, discount))
}

/// Implied volatility at one strike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub iv: f64,
}

/// Implied volatilities of one maturity, strikes strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smile {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub forward: f64,
    pub discount: f64,
    pub points: Vec<SmilePoint>,
}

impl Smile {
    pub fn new(maturity: f64, forward: f64, discount: f64, mut points: Vec<SmilePoint>) -> Result<Self> {
        if !(maturity > 0.0 && forward > 0.0 && discount > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smile needs T, F, D > 0: T={maturity}, F={forward}, D={discount}"
            )));
        }
        points.sort_by(|a, b| a.strike.total_cmp(&b.strike));
        if points.windows(2).any(|w| w[0].strike >= w[1].strike) {
            return Err(Error::InvalidParameter(format!(
                "repeated strike in smile at T={maturity}"
            )));
        }
        if points.iter().any(|p| !(p.strike > 0.0 && p.iv > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "non-positive strike or vol in smile at T={maturity}"
            )));
        }
        Ok(Smile {
            maturity,
            forward,
            discount,
            points,
        })
    }

    pub fn strikes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.strike).collect()
    }

    pub fn ivs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.iv).collect()
    }

    /// Implied volatility nearest to the forward.
    pub fn atm_vol(&self) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| {
                let da = (a.strike / self.forward).ln().abs();
                let db = (b.strike / self.forward).ln().abs();
                da.total_cmp(&db)
            })
            .map(|p| p.iv)
    }
}

/// Smiles of one trade date, maturities increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub date: NaiveDate,
    pub smiles: Vec<Smile>,
}

/// Keeps points whose call-equivalent forward delta lies strictly inside
/// `(lo, hi)`.
pub fn filter_by_delta(smile: &Smile, lo: f64, hi: f64) -> Result<Smile> {
    let mut points = Vec::with_capacity(smile.points.len());
    for p in &smile.points {
        let opt = EuropeanOption::new(p.strike, smile.maturity, true, smile.forward, smile.discount.min(1.0))?;
        let delta = bs_delta(&opt, p.iv);
        if delta > lo && delta < hi {
            points.push(*p);
        }
    }
    if points.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no quote at T={} inside the delta band ({lo}, {hi})",
            smile.maturity
        )));
    }
    Ok(Smile {
        points,
        ..smile.clone()
    })
}

/// Default Black delta band of the quote filter.
pub const DELTA_BAND: (f64, f64) = (0.10, 0.90);

/// A quote that could not be turned into an implied volatility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropped {
    pub date: NaiveDate,
    #[serde(rename = "T")]
    pub maturity: f64,
    pub strike: f64,
    pub reason: String,
}

/// Surfaces built from quotes, one per trade date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSet {
    pub surfaces: Vec<Surface>,
    pub dropped: Vec<Dropped>,
}

/// Groups quotes by date and maturity, extracts `(F, D)` per maturity,
/// inverts the out-of-the-money price at each strike and applies the delta
/// filter. Maturities with too few pairs or no surviving quote are reported
/// in `dropped` with strike 0.
pub fn build_surfaces(quotes: &[OptionQuote], band: (f64, f64)) -> Result<SurfaceSet> {
    let mut by_date: BTreeMap<NaiveDate, BTreeMap<u64, Vec<OptionQuote>>> = BTreeMap::new();
    for q in quotes {
        by_date
            .entry(q.date)
            .or_default()
            .entry(q.maturity.to_bits())
            .or_default()
            .push(*q);
    }
    let mut surfaces = Vec::new();
    let mut dropped = Vec::new();
    for (date, tenors) in by_date {
        let mut smiles = Vec::new();
        let mut tenors: Vec<(f64, Vec<OptionQuote>)> =
            tenors.into_iter().map(|(k, v)| (f64::from_bits(k), v)).collect();
        tenors.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (maturity, qs) in tenors {
            let drop_tenor = |reason: String| Dropped {
                date,
                maturity,
                strike: 0.0,
                reason,
            };
            let (forward, discount) = match extract_forward_discount(&qs) {
                Ok(fd) => fd,
                Err(e) => {
                    dropped.push(drop_tenor(e.to_string()));
                    continue;
                }
            };
            let mut by_strike: BTreeMap<u64, (Option<f64>, Option<f64>)> = BTreeMap::new();
            for q in &qs {
                let e = by_strike.entry(q.strike.to_bits()).or_default();
                if q.is_call {
                    e.0 = Some(q.price);
                } else {
                    e.1 = Some(q.price);
                }
            }
            let mut points = Vec::new();
            for (k, (call, put)) in by_strike {
                let strike = f64::from_bits(k);
                let otm_call = strike >= forward;
                let (is_call, price) = match (call, put) {
                    (Some(c), Some(p)) => (otm_call, if otm_call { c } else { p }),
                    (Some(c), None) => (true, c),
                    (None, Some(p)) => (false, p),
                    (None, None) => continue,
                };
                let iv = EuropeanOption::new(strike, maturity, is_call, forward, discount.min(1.0))
                    .and_then(|opt| implied_vol(price, &opt));
                match iv {
                    Ok(iv) => points.push(SmilePoint { strike, iv }),
                    Err(e) => dropped.push(Dropped {
                        date,
                        maturity,
                        strike,
                        reason: e.to_string(),
                    }),
                }
            }
            if points.is_empty() {
                dropped.push(drop_tenor("no invertible quote".into()));
                continue;
            }
            let smile = Smile::new(maturity, forward, discount, points)?;
            match filter_by_delta(&smile, band.0, band.1) {
                Ok(s) => smiles.push(s),
                Err(e) => dropped.push(drop_tenor(e.to_string())),
            }
        }
        if !smiles.is_empty() {
            surfaces.push(Surface { date, smiles });
        }
    }
    if surfaces.is_empty() {
        return Err(Error::InsufficientData("no usable smile in the quotes".into()));
    }
    Ok(SurfaceSet { surfaces, dropped })
}

/// How synthetic strikes are placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrikeRule {
    /// Strikes at equally spaced Black deltas of the model ATM volatility.
    Delta { lo: f64, hi: f64, count: usize },
    /// Strikes at equally spaced `K / F`.
    Moneyness { lo: f64, hi: f64, count: usize },
    /// Listed-style strikes on the fixed grid `j * step * spot` that fall
    /// inside the Black delta range `[lo, hi]` of the model ATM volatility.
    /// Longer maturities get more strikes, as on exchange strike ladders.
    Grid { step: f64, lo: f64, hi: f64 },
}

/// Default maturity grid of synthetic surfaces (year fractions).
pub const DEFAULT_MATURITIES: [f64; 8] = [
    1.0 / 52.0,
    2.0 / 52.0,
    1.0 / 12.0,
    2.0 / 12.0,
    3.0 / 12.0,
    6.0 / 12.0,
    1.0,
    2.0,
];

/// Ground truth and quoting conventions of a synthetic surface. Missing
/// fields take their defaults when deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub truth: CurveSpec,
    pub alpha: f64,
    pub maturities: Vec<f64>,
    pub strikes: StrikeRule,
    /// Standard deviation of the Gaussian IV noise in basis points.
    pub noise_bps: f64,
    pub seed: u64,
    pub spot: f64,
    pub rate: f64,
    pub dividend: f64,
    pub date: NaiveDate,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            truth: CurveSpec::default(),
            alpha: 0.5,
            maturities: DEFAULT_MATURITIES.to_vec(),
            strikes: StrikeRule::Grid {
                step: 0.01,
                lo: DELTA_BAND.0,
                hi: DELTA_BAND.1,
            },
            noise_bps: 5.0,
            seed: 42,
            spot: 100.0,
            rate: 0.02,
            dividend: 0.01,
            date: NaiveDate::from_ymd_opt(2024, 1, 2).expect("valid date"),
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.maturities.is_empty() || self.maturities.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidParameter(
                "maturity grid must be non-empty and positive".into(),
            ));
        }
        if !(self.noise_bps >= 0.0) || !(self.spot > 0.0) || !self.rate.is_finite() || !self.dividend.is_finite() {
            return Err(Error::InvalidParameter(
                "noise must be >= 0, spot > 0, rates finite".into(),
            ));
        }
        let (lo, hi, count) = match self.strikes {
            StrikeRule::Delta { lo, hi, count } => (lo, hi, count),
            StrikeRule::Moneyness { lo, hi, count } => (lo, hi, count),
            StrikeRule::Grid { step, lo, hi } => {
                if !(step > 0.0) {
                    return Err(Error::InvalidParameter("strike grid step must be > 0".into()));
                }
                (lo, hi, 2)
            }
        };
        if count < 2 || !(lo > 0.0 && lo < hi) {
            return Err(Error::InvalidParameter(
                "strike rule needs count >= 2 and 0 < lo < hi".into(),
            ));
        }
        if matches!(self.strikes, StrikeRule::Delta { .. } | StrikeRule::Grid { .. }) && hi >= 1.0 {
            return Err(Error::InvalidParameter("delta bounds must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Generated surface with its quotes and the model used to price them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSurface {
    pub surface: Surface,
    pub quotes: Vec<OptionQuote>,
    pub truth: ModelParams,
}

fn atm_total_vol(tenor: &TenorParams, alpha: f64, forward: f64, discount: f64, grid: &PricingGrid) -> Result<f64> {
    let t = tenor.maturity;
    let atm = price_strikes(tenor, alpha, forward, discount, &[forward], grid)?[0].0;
    let vol = implied_vol(atm, &EuropeanOption::new(forward, t, true, forward, discount)?)?;
    Ok(vol * t.sqrt())
}

/// Strike whose forward Black delta at total volatility `s` equals `delta`.
fn strike_at_delta(forward: f64, s: f64, delta: f64, std_normal: &StdNormal) -> f64 {
    forward * (-s * std_normal.inverse_cdf(delta) + 0.5 * s * s).exp()
}

fn grid_points(lo: f64, hi: f64, count: usize) -> impl DoubleEndedIterator<Item = f64> {
    (0..count).map(move |i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
}

/// Prices a surface from the ground-truth curves, perturbs the implied
/// volatilities with Gaussian noise and emits call and put quotes at every
/// strike from the same noisy volatility. Maturities, strikes and prices
/// are rounded to 12 significant digits so the CSV round trip is exact.
pub fn gen_synthetic_surface(cfg: &SyntheticConfig, grid: &PricingGrid) -> Result<SyntheticSurface> {
    cfg.validate()?;
    let mut maturities: Vec<f64> = cfg.maturities.iter().map(|&t| round_sig12(t)).collect();
    maturities.sort_by(f64::total_cmp);
    let truth = cfg.truth.model(cfg.alpha, &maturities)?;
    let noise = Normal::new(0.0, cfg.noise_bps * 1e-4).map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;
    let std_normal = StdNormal::standard();
    let mut smiles = Vec::new();
    let mut quotes = Vec::new();
    for (i, tenor) in truth.tenors.iter().enumerate() {
        let t = tenor.maturity;
        let forward = cfg.spot * ((cfg.rate - cfg.dividend) * t).exp();
        let discount = (-cfg.rate * t).exp();
        let strikes: Vec<f64> = match cfg.strikes {
            StrikeRule::Moneyness { lo, hi, count } => grid_points(lo, hi, count).map(|m| m * forward).collect(),
            StrikeRule::Delta { lo, hi, count } => {
                let s = atm_total_vol(tenor, cfg.alpha, forward, discount, grid)?;
                // descending deltas give increasing strikes
                grid_points(lo, hi, count)
                    .rev()
                    .map(|d| strike_at_delta(forward, s, d, &std_normal))
                    .collect()
            }
            StrikeRule::Grid { step, lo, hi } => {
                let s = atm_total_vol(tenor, cfg.alpha, forward, discount, grid)?;
                let unit = step * cfg.spot;
                let first = (strike_at_delta(forward, s, hi, &std_normal) / unit).ceil() as i64;
                let last = (strike_at_delta(forward, s, lo, &std_normal) / unit).floor() as i64;
                (first.max(1)..=last).map(|j| j as f64 * unit).collect()
            }
        };
        let strikes: Vec<f64> = strikes.into_iter().map(round_sig12).collect();
        let prices = price_strikes(tenor, cfg.alpha, forward, discount, &strikes, grid)?;
        let mut rng = RngSpec::new(cfg.seed, i as u64).generator();
        let mut points = Vec::with_capacity(strikes.len());
        for (&strike, &(call, put)) in strikes.iter().zip(&prices) {
            let otm_call = strike >= forward;
            let opt = EuropeanOption::new(strike, t, otm_call, forward, discount)?;
            let clean = implied_vol(if otm_call { call } else { put }, &opt)?;
            let iv = (clean + noise.sample(&mut rng)).max(1e-4);
            points.push(SmilePoint { strike, iv });
            for is_call in [true, false] {
                let mut q = OptionQuote::from_implied_vol(cfg.date, t, strike, is_call, iv, forward, discount)?;
                q.price = round_sig12(q.price);
                quotes.push(q);
            }
        }
        smiles.push(Smile::new(t, forward, discount, points)?);
    }
    Ok(SyntheticSurface {
        surface: Surface { date: cfg.date, smiles },
        quotes,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 3, 15).unwrap()
    }

    #[test]
    fn ingest_counts_rejects_and_duplicates() {
        let csv = "date,T,strike,flag,price\n\
                   2024-03-15,0.25,100,C,4.1\n\
                   2024-03-15,0.25,-5,C,4.1\n\
                   2024-03-15,0.25,100,C,4.2\n\
                   2024-03-15,0.25,100,P,3.9\n\
                   2024-03-15,0.25,110,X,1.0\n";
        let got = ingest_quotes(csv.as_bytes()).unwrap();
        assert_eq!(got.quotes.len(), 2);
        assert_eq!(got.quotes[0].price, 4.1);
        assert_eq!(got.rejects.len(), 3);
        assert_eq!(got.rejects[0].line, 3);
        assert!(got.rejects[0].reason.contains("strike"));
        assert!(got.rejects[1].reason.contains("duplicate"));
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(
            ingest_quotes("a,b\n1,2\n".as_bytes()),
            Err(Error::Malformed(_))
        ));
        let bad = "date,T,strike,flag,price\n2024-03-15,0.25,0,C,1\n";
        assert!(matches!(ingest_quotes(bad.as_bytes()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn parity_regression_is_exact_on_consistent_quotes() {
        let (f, d) = (100.0, 0.99);
        let mut qs = Vec::new();
        for k in [90.0, 100.0, 110.0] {
            for is_call in [true, false] {
                qs.push(OptionQuote::from_implied_vol(date(), 0.5, k, is_call, 0.2, f, d).unwrap());
            }
        }
        let (fh, dh) = extract_forward_discount(&qs).unwrap();
        assert!((fh - f).abs() < 1e-10 * f && (dh - d).abs() < 1e-12);
        assert!(matches!(
            extract_forward_discount(&qs[..2]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn delta_filter_uses_open_band() {
        let smile = Smile::new(
            0.25,
            100.0,
            1.0,
            vec![
                SmilePoint { strike: 100.0, iv: 0.2 },
                SmilePoint { strike: 120.0, iv: 0.2 },
            ],
        )
        .unwrap();
        let kept = filter_by_delta(&smile, 0.1, 0.9).unwrap();
        assert_eq!(kept.strikes(), vec![100.0]);
        // a band edge placed exactly on the ATM delta drops it
        let atm = bs_delta(&EuropeanOption::new(100.0, 0.25, true, 100.0, 1.0).unwrap(), 0.2);
        assert!(filter_by_delta(&smile, atm, 0.99).is_err());
    }

    #[test]
    fn csv_round_trip_and_twelve_digits() {
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(0.25), "0.25");
        let qs = vec![OptionQuote::from_implied_vol(date(), 1.0 / 52.0, 101.3, false, 0.21, 100.0, 0.999).unwrap()];
        let mut buf = Vec::new();
        write_quotes(&mut buf, &qs).unwrap();
        let back = ingest_quotes(buf.as_slice()).unwrap().quotes;
        assert_eq!(back[0].maturity, round_sig12(qs[0].maturity));
        assert!((back[0].price - qs[0].price).abs() <= 1e-11 * qs[0].price);
    }
}
