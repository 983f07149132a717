use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use atslab::calibration::{calibrate_surface, calibrate_tenor_constant_eta, CalibrationConfig, SurfaceFit};
use atslab::inference::{
    aggregate_days, fit_power_law, write_aggregate_csv, write_regression_csv, DayResult, ScalingReport, Weighting,
};
use atslab::market_data::{
    build_surfaces, fmt_sig12, gen_synthetic_surface, ingest_quotes, write_quotes, Dropped, Reject, Surface,
    SyntheticConfig, DEFAULT_MATURITIES, DELTA_BAND,
};
use atslab::pricing::{fourier_price, implied_vol, price_strikes, EuropeanOption, PricingGrid};
use atslab::report::{lab_report, smile_report, write_mse_csv, write_smile_csv};
use atslab::sampling::{mc_price_strikes, RngSpec};
use atslab::subordination::ETA_CONSTANCY_TOL;
use atslab::{CurveSpec, Error, Execution, ModelParams, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::args::{Command, MarketArgs, ModelArgs};
use crate::output::{check_paths, read_json, regression_svg, sibling, write_atomic, write_json};

const DEFAULT_ALPHA: f64 = 0.5;

/// Output of `calibrate`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CalibrationRun {
    pub dataset: String,
    pub alpha: f64,
    pub constant_eta: bool,
    pub config: CalibrationConfig,
    pub fits: Vec<SurfaceFit>,
    pub dropped: Vec<Dropped>,
    pub rejects: Vec<Reject>,
}

/// Test result of one trade date.
#[derive(Debug, Serialize, Deserialize)]
pub struct EtaDay {
    pub date: NaiveDate,
    pub model: String,
    pub report: ScalingReport,
}

/// Output of `test-eta`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EtaTestRun {
    pub dataset: String,
    pub weighting: Weighting,
    pub days: Vec<EtaDay>,
}

/// One row of `mc-check`.
#[derive(Debug, Serialize)]
pub struct McCheckRow {
    #[serde(rename = "T")]
    pub maturity: f64,
    #[serde(rename = "K")]
    pub strike: f64,
    pub is_call: bool,
    pub fourier_price: f64,
    pub mc_price: f64,
    pub mc_se: f64,
    pub z_score: f64,
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenSynthetic {
            input,
            out,
            truth_out,
            seed,
            delta,
            noise_bps,
            model,
        } => {
            let truth_out = truth_out.unwrap_or_else(|| sibling(&out, "truth.json"));
            check_paths(&opt_path(&input), &[&out, &truth_out])?;
            let mut cfg: SyntheticConfig = match &input {
                Some(p) => read_json(p)?,
                None => SyntheticConfig::default(),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.truth.delta = delta.unwrap_or(cfg.truth.delta);
            cfg.noise_bps = noise_bps.unwrap_or(cfg.noise_bps);
            cfg.alpha = model.alpha_or(cfg.alpha);
            let generated = gen_synthetic_surface(&cfg, &PricingGrid::default())?;
            write_atomic(&out, |w| write_quotes(w, &generated.quotes))?;
            write_json(&truth_out, &generated.truth)
        }

        Command::Calibrate {
            input,
            out,
            constant_eta,
            tol,
            dataset,
            model,
        } => {
            check_paths(&[&input], &[&out])?;
            let alpha = model.alpha_or(DEFAULT_ALPHA);
            let mut config = CalibrationConfig::default();
            if let Some(tol) = tol {
                if !(tol > 0.0) {
                    return Err(Error::InvalidParameter(format!("--tol must be > 0, got {tol}")));
                }
                config.tol = tol;
            }
            let ingested = ingest_quotes(BufReader::new(File::open(&input)?))?;
            let set = build_surfaces(&ingested.quotes, DELTA_BAND)?;
            let fits = set
                .surfaces
                .iter()
                .map(|s| {
                    if constant_eta {
                        calibrate_tenor_constant_eta(s, alpha, &config, Execution::Parallel)
                    } else {
                        calibrate_surface(s, alpha, &config, Execution::Parallel)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let run = CalibrationRun {
                dataset: dataset.unwrap_or_else(|| stem(&input)),
                alpha,
                constant_eta,
                config,
                fits,
                dropped: set.dropped,
                rejects: ingested.rejects,
            };
            write_json(&out, &run)
        }

        Command::TestEta {
            input,
            out,
            equal_weights,
            regression_csv,
            svg,
            date,
        } => {
            let extra: Vec<&Path> = regression_csv.iter().chain(svg.iter()).map(PathBuf::as_path).collect();
            check_paths(&[&input], &[&[out.as_path()][..], &extra].concat())?;
            let run: CalibrationRun = read_json(&input)?;
            let weighting = if equal_weights {
                Weighting::Equal
            } else {
                Weighting::InverseVariance
            };
            let days = run
                .fits
                .iter()
                .map(|f| {
                    Ok(EtaDay {
                        date: f.date,
                        model: f.model.clone(),
                        report: fit_power_law(&f.theta_points, weighting)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if regression_csv.is_some() || svg.is_some() {
                let i = select_date(run.fits.iter().map(|f| f.date), date)?;
                let rows = days[i].report.regression_rows(&run.fits[i].theta_points);
                if let Some(p) = &regression_csv {
                    write_atomic(p, |w| write_regression_csv(w, &rows))?;
                }
                if let Some(p) = &svg {
                    let r = &days[i].report;
                    let title = format!(
                        "{} {} {}: delta_hat = {:.3} (p = {:.2e})",
                        run.dataset, days[i].model, days[i].date, r.delta_hat, r.p_value
                    );
                    let body = regression_svg(&rows, &title);
                    write_atomic(p, |w| Ok(w.write_all(body.as_bytes())?))?;
                }
            }
            let report = EtaTestRun {
                dataset: run.dataset,
                weighting,
                days,
            };
            write_json(&out, &report)
        }

        Command::Aggregate { input, out, json } => {
            check_paths(&[&input], &[&[out.as_path()][..], &opt_path(&json)].concat())?;
            if !input.is_dir() {
                return Err(Error::InvalidParameter(format!(
                    "{} is not a directory",
                    input.display()
                )));
            }
            let mut files: Vec<PathBuf> = fs::read_dir(&input)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            files.retain(|p| p.extension().is_some_and(|e| e == "json"));
            files.sort();
            let mut results = Vec::new();
            for p in &files {
                let run: EtaTestRun = read_json(p)?;
                results.extend(run.days.into_iter().map(|d| DayResult {
                    day: d.date.to_string(),
                    model: d.model,
                    dataset: run.dataset.clone(),
                    p_value: d.report.p_value,
                }));
            }
            let report = aggregate_days(&results)?;
            write_atomic(&out, |w| write_aggregate_csv(w, &report))?;
            if let Some(p) = &json {
                write_json(p, &report)?;
            }
            Ok(())
        }

        Command::Price {
            input,
            out,
            market,
            model,
        } => {
            check_paths(&opt_path(&input), &[&out])?;
            let params = load_model(input.as_deref(), &model)?;
            let grid = PricingGrid::default();
            let strikes = market_strikes(&market)?;
            let tenors = select_tenors(&params, &market.maturities)?;
            let mut rows = Vec::new();
            for tenor in tenors {
                let t = tenor.maturity;
                let prices = price_strikes(tenor, params.alpha, market.forward, market.discount, &strikes, &grid)?;
                for (&k, (call, put)) in strikes.iter().zip(prices) {
                    let otm_call = k >= market.forward;
                    let opt = EuropeanOption::new(k, t, otm_call, market.forward, market.discount)?;
                    // no implied vol exists for a price on the no-arbitrage bound
                    let iv = match implied_vol(if otm_call { call } else { put }, &opt) {
                        Ok(v) => Some(v),
                        Err(Error::PriceOutOfBounds { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    rows.push(([t, k, call, put], iv));
                }
            }
            write_atomic(&out, |w| {
                writeln!(w, "T,K,call_price,put_price,iv")?;
                for (values, iv) in &rows {
                    let cells: Vec<String> = values.iter().map(|&v| fmt_sig12(v)).collect();
                    writeln!(w, "{},{}", cells.join(","), iv.map(fmt_sig12).unwrap_or_default())?;
                }
                Ok(())
            })
        }

        Command::McCheck {
            input,
            out,
            market,
            n,
            seed,
            model,
        } => {
            check_paths(&opt_path(&input), &[&out])?;
            let params = load_model(input.as_deref(), &model)?;
            let grid = PricingGrid::default();
            let strikes = market_strikes(&market)?;
            let tenors = select_tenors(&params, &market.maturities)?;
            let mut rows = Vec::new();
            for (i, tenor) in tenors.into_iter().enumerate() {
                let t = tenor.maturity;
                let mc = mc_price_strikes(
                    tenor,
                    params.alpha,
                    market.forward,
                    market.discount,
                    &strikes,
                    n,
                    RngSpec::new(seed, i as u64),
                    Execution::Parallel,
                )?;
                for q in mc {
                    for (is_call, est) in [(true, q.call), (false, q.put)] {
                        let opt = EuropeanOption::new(q.strike, t, is_call, market.forward, market.discount)?;
                        let f = fourier_price(&opt, &params, &grid)?;
                        rows.push(McCheckRow {
                            maturity: t,
                            strike: q.strike,
                            is_call,
                            fourier_price: f,
                            mc_price: est.price,
                            mc_se: est.std_error,
                            z_score: if est.std_error > 0.0 {
                                (f - est.price) / est.std_error
                            } else {
                                0.0
                            },
                        });
                    }
                }
            }
            write_json(&out, &rows)
        }

        Command::Lab { input, out, tol, model } => {
            check_paths(&opt_path(&input), &[&out])?;
            let curves: CurveSpec = match &input {
                Some(p) => read_json(p)?,
                None => CurveSpec::default(),
            };
            let tol = tol.unwrap_or(ETA_CONSTANCY_TOL);
            if !(tol >= 0.0) {
                return Err(Error::InvalidParameter(format!("--tol must be >= 0, got {tol}")));
            }
            let report = lab_report(&curves, model.alpha_or(DEFAULT_ALPHA), tol)?;
            write_json(&out, &report)
        }

        Command::SmileReport {
            input,
            fits,
            constant_fits,
            out,
            mse_out,
            date,
        } => {
            let mse_out = mse_out.unwrap_or_else(|| sibling(&out, "mse.csv"));
            check_paths(&[&input, &fits, &constant_fits], &[&out, &mse_out])?;
            let free: CalibrationRun = read_json(&fits)?;
            let flat: CalibrationRun = read_json(&constant_fits)?;
            let ingested = ingest_quotes(BufReader::new(File::open(&input)?))?;
            let set = build_surfaces(&ingested.quotes, DELTA_BAND)?;
            let i = select_date(set.surfaces.iter().map(|s| s.date), date)?;
            let surface: &Surface = &set.surfaces[i];
            let report = smile_report(
                fit_on(&free, surface.date)?,
                fit_on(&flat, surface.date)?,
                surface,
                &PricingGrid::default(),
            )?;
            write_atomic(&out, |w| write_smile_csv(w, &report))?;
            write_atomic(&mse_out, |w| write_mse_csv(w, &report))
        }
    }
}

fn opt_path(p: &Option<PathBuf>) -> Vec<&Path> {
    p.iter().map(PathBuf::as_path).collect()
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Index of `wanted` among `dates`, or the first date when none is given.
fn select_date(mut dates: impl Iterator<Item = NaiveDate>, wanted: Option<NaiveDate>) -> Result<usize> {
    match wanted {
        None => dates
            .next()
            .map(|_| 0)
            .ok_or_else(|| Error::InsufficientData("no trade dates".into())),
        Some(d) => dates
            .position(|x| x == d)
            .ok_or_else(|| Error::InvalidParameter(format!("no data for date {d}"))),
    }
}

fn fit_on(run: &CalibrationRun, date: NaiveDate) -> Result<&SurfaceFit> {
    run.fits
        .iter()
        .find(|f| f.date == date)
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no fit for {date}", run.dataset)))
}

fn load_model(input: Option<&Path>, model: &ModelArgs) -> Result<ModelParams> {
    match input {
        Some(p) => {
            let params: ModelParams = read_json(p)?;
            if let Some(a) = model.chosen() {
                if a != params.alpha {
                    return Err(Error::InvalidParameter(format!(
                        "requested alpha {a} but {} has alpha {}",
                        p.display(),
                        params.alpha
                    )));
                }
            }
            Ok(params)
        }
        None => CurveSpec::default().model(model.alpha_or(DEFAULT_ALPHA), &DEFAULT_MATURITIES),
    }
}

fn market_strikes(market: &MarketArgs) -> Result<Vec<f64>> {
    if !(market.forward > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "--forward must be > 0, got {}",
            market.forward
        )));
    }
    if !(market.discount > 0.0 && market.discount <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "--discount must lie in (0, 1], got {}",
            market.discount
        )));
    }
    if market.strikes.is_empty() {
        return Ok([0.8, 0.9, 1.0, 1.1, 1.2].iter().map(|m| m * market.forward).collect());
    }
    if let Some(k) = market.strikes.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::InvalidParameter(format!("strikes must be > 0, got {k}")));
    }
    Ok(market.strikes.clone())
}

fn select_tenors<'a>(params: &'a ModelParams, maturities: &[f64]) -> Result<Vec<&'a atslab::TenorParams>> {
    if maturities.is_empty() {
        return Ok(params.tenors.iter().collect());
    }
    maturities.iter().map(|&t| params.tenor(t)).collect()
}
