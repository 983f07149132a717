//! Per-maturity calibration of `(sigma_T, k_T, eta_T)` to implied
//! volatilities, Gauss-Newton parameter covariance, the `theta` map and the
//! restricted fit with one skew parameter shared by all maturities.
//!
//! Each tenor is fitted by Levenberg-Marquardt on IV residuals. Parameters
//! live in a bounded log space, `ln p = ln lo + (ln hi - ln lo) s(y)` with
//! `s` the logistic function, so every trial point respects the box.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{Smile, Surface};
use crate::model::{model_label, TenorParams};
use crate::par::{self, Execution};
use crate::pricing::{black_price, implied_vol, normalized_calls, EuropeanOption, PricingGrid};

/// Box constraints on `(sigma, k, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub sigma: (f64, f64),
    pub k: (f64, f64),
    pub eta: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            sigma: (1e-4, 5.0),
            k: (1e-8, 1e3),
            eta: (1e-4, 1e3),
        }
    }
}

impl Bounds {
    fn as_array(&self) -> [(f64, f64); 3] {
        [self.sigma, self.k, self.eta]
    }

    fn validate(&self) -> Result<()> {
        if self
            .as_array()
            .iter()
            .all(|&(lo, hi)| lo > 0.0 && lo < hi && hi.is_finite())
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "bounds must satisfy 0 < lo < hi: {self:?}"
            )))
        }
    }
}

/// Loss minimized by the outer search of the shared-`eta` fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JointObjective {
    /// Squared Black price errors per unit forward, summed over all quotes.
    #[default]
    Price,
    /// Squared implied volatility errors, summed over all quotes.
    ImpliedVol,
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub bounds: Bounds,
    /// Number of starting points: the initial guess plus dispersed ones.
    pub starts: usize,
    pub max_iter: usize,
    /// Relative decrease of the objective below which a start stops.
    pub tol: f64,
    /// Relative finite-difference step of the covariance Jacobian.
    pub fd_step: f64,
    pub grid: PricingGrid,
    pub joint_objective: JointObjective,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            bounds: Bounds::default(),
            starts: 5,
            max_iter: 100,
            tol: 1e-10,
            fd_step: 1e-5,
            grid: PricingGrid::default(),
            joint_objective: JointObjective::default(),
        }
    }
}

/// Calibrated parameters of one maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenorFit {
    pub params: TenorParams,
    /// Covariance of `(sigma, k, eta)`; rows of fixed parameters are zero.
    pub covariance: [[f64; 3]; 3],
    /// Mean squared implied volatility error.
    pub mse: f64,
    pub n_quotes: usize,
    pub converged: bool,
}

/// Initial guess `sigma = ATM IV, k = 1, eta = 1`.
pub fn default_init(smile: &Smile) -> [f64; 3] {
    [smile.atm_vol().unwrap_or(0.2), 1.0, 1.0]
}

/// Model implied volatilities at the strikes of a smile.
pub fn model_ivs(tenor: &TenorParams, alpha: f64, smile: &Smile, grid: &PricingGrid) -> Result<Vec<f64>> {
    let xs: Vec<f64> = smile.points.iter().map(|p| (p.strike / smile.forward).ln()).collect();
    let calls = normalized_calls(tenor, alpha, &xs, grid)?;
    xs.iter()
        .zip(calls)
        .map(|(&x, c)| {
            let is_call = x >= 0.0;
            let price = if is_call { c } else { c - (1.0 - x.exp()) };
            let opt = EuropeanOption::new(x.exp(), tenor.maturity, is_call, 1.0, 1.0)?;
            implied_vol(price, &opt)
        })
        .collect()
}

fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

fn to_natural(y: f64, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * logistic(y)).exp()
}

fn to_unbounded(p: f64, (lo, hi): (f64, f64)) -> f64 {
    // keep starting points off the flat ends of the logistic
    let s = ((p.ln() - lo.ln()) / (hi.ln() - lo.ln())).clamp(1e-6, 1.0 - 1e-6);
    (s / (1.0 - s)).ln()
}

struct LmOutcome {
    y: Vec<f64>,
    cost: f64,
    converged: bool,
}

/// Levenberg-Marquardt on `0.5 |r(y)|^2`; `resid` returns `None` where the
/// model cannot be evaluated, which rejects the step.
fn levenberg_marquardt(
    resid: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    y0: &[f64],
    max_iter: usize,
    tol: f64,
) -> Option<LmOutcome> {
    let cost_of = |r: &[f64]| 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    let m = y0.len();
    let mut y = y0.to_vec();
    let mut r = resid(&y)?;
    let mut cost = cost_of(&r);
    let mut lambda = -1.0;
    let mut nu = 2.0;
    let mut converged = false;
    for _ in 0..max_iter {
        if cost <= 1e-30 {
            converged = true;
            break;
        }
        let mut j = DMatrix::zeros(r.len(), m);
        for c in 0..m {
            let h = 1e-6 * (1.0 + y[c].abs());
            let mut yp = y.clone();
            yp[c] += h;
            // fall back to a backward difference at the edge of the domain
            let (hi, lo) = match resid(&yp) {
                Some(rp) => (rp, r.clone()),
                None => {
                    yp[c] = y[c] - h;
                    (r.clone(), resid(&yp)?)
                }
            };
            for i in 0..r.len() {
                j[(i, c)] = (hi[i] - lo[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let a = j.transpose() * &j;
        let g = j.transpose() * &rv;
        if g.amax() <= 1e-15 {
            converged = true;
            break;
        }
        if lambda < 0.0 {
            lambda = 1e-3 * (0..m).map(|i| a[(i, i)]).fold(0.0, f64::max).max(1e-12);
        }
        let mut accepted = false;
        while !accepted {
            let mut damped = a.clone();
            for i in 0..m {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= nu;
                    nu *= 2.0;
                    if lambda > 1e16 {
                        break;
                    }
                    continue;
                }
            };
            let y_new: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial = resid(&y_new).map(|rn| {
                let c = cost_of(&rn);
                (rn, c)
            });
            match trial {
                Some((rn, c_new)) if c_new < cost => {
                    let predicted =
                        0.5 * step.dot(&(lambda * step.component_mul(&a.diagonal().map(|d| d.max(1e-12))) - &g));
                    let rho = if predicted > 0.0 {
                        (cost - c_new) / predicted
                    } else {
                        1.0
                    };
                    lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                    nu = 2.0;
                    let decrease = cost - c_new;
                    let small_step = step.amax() <= 1e-12 * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                    y = y_new;
                    r = rn;
                    cost = c_new;
                    accepted = true;
                    if decrease <= tol * cost.max(1e-300) || small_step {
                        converged = true;
                    }
                }
                _ => {
                    lambda *= nu;
                    nu *= 2.0;
                    if lambda > 1e16 {
                        break;
                    }
                }
            }
        }
        if !accepted {
            // no descent direction left at working precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Some(LmOutcome { y, cost, converged })
}

/// Fits the free parameters of one smile. `fixed_eta` pins `eta` and fits
/// `(sigma, k)` only.
fn fit_smile(
    smile: &Smile,
    alpha: f64,
    starts: &[[f64; 3]],
    fixed_eta: Option<f64>,
    cfg: &CalibrationConfig,
) -> Result<TenorFit> {
    cfg.bounds.validate()?;
    let n = smile.points.len();
    let n_free = if fixed_eta.is_some() { 2 } else { 3 };
    if n < n_free + 1 {
        return Err(Error::InsufficientData(format!(
            "calibration at T={} needs >= {} quotes, found {n}",
            smile.maturity,
            n_free + 1
        )));
    }
    let bounds = cfg.bounds.as_array();
    let market = smile.ivs();
    let t = smile.maturity;
    let natural = |y: &[f64]| -> [f64; 3] {
        [
            to_natural(y[0], bounds[0]),
            to_natural(y[1], bounds[1]),
            fixed_eta.unwrap_or_else(|| to_natural(y[2], bounds[2])),
        ]
    };
    let residuals = |p: [f64; 3]| -> Result<Vec<f64>> {
        let tenor = TenorParams::new(t, p[0], p[1], p[2], alpha)?;
        let ivs = model_ivs(&tenor, alpha, smile, &cfg.grid)?;
        Ok(ivs.iter().zip(&market).map(|(m, q)| m - q).collect())
    };
    let resid_y = |y: &[f64]| residuals(natural(y)).ok();
    let mut best: Option<LmOutcome> = None;
    for s in starts {
        let y0: Vec<f64> = (0..n_free)
            .map(|i| to_unbounded(s[i].clamp(bounds[i].0, bounds[i].1), bounds[i]))
            .collect();
        if let Some(out) = levenberg_marquardt(&resid_y, &y0, cfg.max_iter, cfg.tol) {
            if best.as_ref().is_none_or(|b| out.cost < b.cost) {
                best = Some(out);
            }
        }
    }
    let best =
        best.ok_or_else(|| Error::NonConvergence(format!("no start could be evaluated at T={}", smile.maturity)))?;
    let p = natural(&best.y);
    let params = TenorParams::new(t, p[0], p[1], p[2], alpha)?;
    let mse = 2.0 * best.cost / n as f64;
    let covariance = covariance(&residuals, p, n_free, mse, cfg.fd_step)?;
    Ok(TenorFit {
        params,
        covariance,
        mse,
        n_quotes: n,
        converged: best.converged,
    })
}

/// Gauss-Newton covariance `(J^T J)^-1 mse` from a central-difference
/// Jacobian in the natural parameters.
fn covariance(
    residuals: &dyn Fn([f64; 3]) -> Result<Vec<f64>>,
    p: [f64; 3],
    n_free: usize,
    mse: f64,
    rel_step: f64,
) -> Result<[[f64; 3]; 3]> {
    let base = residuals(p)?;
    let mut j = DMatrix::zeros(base.len(), n_free);
    for c in 0..n_free {
        let h = rel_step * p[c];
        let (mut up, mut down) = (p, p);
        up[c] += h;
        down[c] -= h;
        let (ru, rd) = (residuals(up)?, residuals(down)?);
        for i in 0..base.len() {
            j[(i, c)] = (ru[i] - rd[i]) / (2.0 * h);
        }
    }
    let jtj = j.transpose() * j;
    let mut out = [[0.0; 3]; 3];
    // a singular information matrix leaves the covariance unbounded
    let inv = jtj
        .clone()
        .pseudo_inverse(1e-14 * jtj.amax())
        .map_err(|e| Error::NonConvergence(e.to_string()))?;
    for r in 0..n_free {
        for c in 0..n_free {
            out[r][c] = inv[(r, c)] * mse;
        }
    }
    // symmetrize round-off
    let m = Matrix3::from_fn(|r, c| out[r][c]);
    let m = 0.5 * (m + m.transpose());
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    Ok(out)
}

fn dispersed_starts(init: [f64; 3], count: usize) -> Vec<[f64; 3]> {
    const FACTORS: [[f64; 3]; 4] = [[0.85, 0.1, 0.3], [1.15, 0.1, 3.0], [0.85, 10.0, 3.0], [1.15, 10.0, 0.3]];
    let mut starts = vec![init];
    for i in 1..count.max(1) {
        let f = FACTORS[(i - 1) % 4];
        let widen = 1.0 + ((i - 1) / 4) as f64;
        starts.push([init[0] * f[0], init[1] * f[1].powf(widen), init[2] * f[2].powf(widen)]);
    }
    starts
}

/// Least-squares fit of `(sigma, k, eta)` to one smile in implied
/// volatility, with `phi` from the martingale condition. The best of the
/// initial guess and `cfg.starts - 1` dispersed starts is returned.
pub fn calibrate_tenor(smile: &Smile, alpha: f64, init: [f64; 3], cfg: &CalibrationConfig) -> Result<TenorFit> {
    fit_smile(smile, alpha, &dispersed_starts(init, cfg.starts), None, cfg)
}

/// `theta = T sigma^2` reparameterization of one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub theta: f64,
    pub k_hat: f64,
    pub eta_hat: f64,
    /// Delta-method variance of `ln eta_hat`.
    pub var_log_eta: f64,
}

/// Maps fits to `(theta, k_hat, eta_hat) = (T sigma^2, k sigma^2, eta)`.
pub fn to_theta(fits: &[TenorFit]) -> Vec<ThetaPoint> {
    fits.iter()
        .map(|f| {
            let p = &f.params;
            ThetaPoint {
                maturity: p.maturity,
                theta: p.maturity * p.sigma * p.sigma,
                k_hat: p.k * p.sigma * p.sigma,
                eta_hat: p.eta,
                var_log_eta: (f.covariance[2][2] / (p.eta * p.eta)).max(0.0),
            }
        })
        .collect()
}

/// Per-tenor parameters of the `theta` map, with `sigma = 1`.
pub fn theta_tenor(point: &ThetaPoint, alpha: f64) -> Result<TenorParams> {
    TenorParams::new(point.theta, 1.0, point.k_hat, point.eta_hat, alpha)
}

/// Calibration of a whole surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFit {
    pub date: chrono::NaiveDate,
    pub model: String,
    pub alpha: f64,
    pub constant_eta: bool,
    pub tenors: Vec<TenorFit>,
    pub theta_points: Vec<ThetaPoint>,
    /// Maturities whose `theta` does not increase on the previous one.
    pub theta_not_increasing: Vec<f64>,
}

impl SurfaceFit {
    fn new(surface: &Surface, alpha: f64, constant_eta: bool, tenors: Vec<TenorFit>) -> Self {
        let theta_points = to_theta(&tenors);
        let theta_not_increasing = theta_points
            .windows(2)
            .filter(|w| w[1].theta <= w[0].theta)
            .map(|w| w[1].maturity)
            .collect();
        SurfaceFit {
            date: surface.date,
            model: model_label(alpha),
            alpha,
            constant_eta,
            tenors,
            theta_points,
            theta_not_increasing,
        }
    }
}

/// Independent per-maturity fits, run concurrently under `exec`.
pub fn calibrate_surface(
    surface: &Surface,
    alpha: f64,
    cfg: &CalibrationConfig,
    exec: Execution,
) -> Result<SurfaceFit> {
    if surface.smiles.is_empty() {
        return Err(Error::InsufficientData("surface has no smiles".into()));
    }
    let fits = par::map(exec, &surface.smiles, |s| {
        calibrate_tenor(s, alpha, default_init(s), cfg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceFit::new(surface, alpha, false, fits))
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Brent minimization of a scalar function on `[a, b]`.
fn brent_min(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)> {
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1 * d.signum() };
        let fu = f(u)?;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, fx))
}

/// Sum of squared Black price differences per unit forward between the
/// fitted and the market implied volatilities of one smile.
fn price_sse(smile: &Smile, fit: &TenorFit, alpha: f64, grid: &PricingGrid) -> Result<f64> {
    let model = model_ivs(&fit.params, alpha, smile, grid)?;
    let mut sse = 0.0;
    for (p, m) in smile.points.iter().zip(model) {
        let opt = EuropeanOption::new(p.strike / smile.forward, smile.maturity, true, 1.0, 1.0)?;
        sse += (black_price(&opt, m) - black_price(&opt, p.iv)).powi(2);
    }
    Ok(sse)
}

/// Joint fit with one `eta` shared by every maturity and free per-tenor
/// `(sigma, k)`. An outer Brent search on `ln eta` minimizes
/// `cfg.joint_objective` over inner per-tenor IV fits, which run
/// concurrently under `exec`. A single-maturity surface
/// reduces to the free fit.
pub fn calibrate_tenor_constant_eta(
    surface: &Surface,
    alpha: f64,
    cfg: &CalibrationConfig,
    exec: Execution,
) -> Result<SurfaceFit> {
    let free = calibrate_surface(surface, alpha, cfg, exec)?;
    if surface.smiles.len() == 1 {
        return Ok(SurfaceFit::new(surface, alpha, true, free.tenors));
    }
    let inner_cfg = CalibrationConfig { starts: 1, ..*cfg };
    let inner = |eta: f64| -> Result<Vec<TenorFit>> {
        let pairs: Vec<(&Smile, &TenorFit)> = surface.smiles.iter().zip(&free.tenors).collect();
        par::map(exec, &pairs, |(s, f)| {
            let starts = dispersed_starts([f.params.sigma, f.params.k, eta], cfg.starts);
            fit_smile(s, alpha, &starts, Some(eta), &inner_cfg)
        })
        .into_iter()
        .collect()
    };
    let loss = |fits: &[TenorFit]| -> Result<f64> {
        let mut total = 0.0;
        for (s, f) in surface.smiles.iter().zip(fits) {
            total += match cfg.joint_objective {
                JointObjective::ImpliedVol => f.mse * f.n_quotes as f64,
                JointObjective::Price => price_sse(s, f, alpha, &cfg.grid)?,
            };
        }
        Ok(total)
    };
    let log_etas: Vec<f64> = free.tenors.iter().map(|f| f.params.eta.ln()).collect();
    let (eta_lo, eta_hi) = cfg.bounds.eta;
    let lo = (log_etas.iter().cloned().fold(f64::INFINITY, f64::min) - 0.5).max(eta_lo.ln());
    let hi = (log_etas.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5).min(eta_hi.ln());
    let objective = |log_eta: f64| inner(log_eta.exp()).and_then(|f| loss(&f));
    let (best, _) = brent_min(&objective, lo, hi, 1e-4, 60)?;
    let fits = inner(best.exp())?;
    Ok(SurfaceFit::new(surface, alpha, true, fits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{gen_synthetic_surface, SyntheticConfig};
    use crate::model::{ats_log_chf, CurveSpec};
    use num_complex::Complex64;

    #[test]
    fn bounded_transform_round_trips() {
        let b = (1e-4, 5.0);
        for p in [1e-3, 0.2, 4.0] {
            let y = to_unbounded(p, b);
            assert!((to_natural(y, b) / p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let (x, fx) = brent_min(&|x| Ok((x - 0.3).powi(2) + 1.0), -2.0, 3.0, 1e-8, 100).unwrap();
        assert!((x - 0.3).abs() < 1e-6 && (fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_map_values_and_chf_identity() {
        let fit = TenorFit {
            params: TenorParams::new(1.0, 0.2, 2.0, 0.7, 0.5).unwrap(),
            covariance: [[0.0; 3]; 3],
            mse: 0.0,
            n_quotes: 10,
            converged: true,
        };
        let th = to_theta(std::slice::from_ref(&fit))[0];
        assert!((th.theta - 0.04).abs() < 1e-15);
        assert!((th.k_hat - 0.08).abs() < 1e-15);
        assert_eq!(th.eta_hat, 0.7);
        assert_eq!(th.var_log_eta, 0.0);
        let mapped = theta_tenor(&th, 0.5).unwrap();
        for u in [-3.0, -0.5, 0.7, 2.0, 10.0] {
            let a = ats_log_chf(Complex64::new(u, 0.0), &fit.params, 0.5).unwrap();
            let b = ats_log_chf(Complex64::new(u, 0.0), &mapped, 0.5).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn too_few_quotes() {
        let cfg = SyntheticConfig {
            maturities: vec![0.5],
            noise_bps: 0.0,
            ..Default::default()
        };
        let mut smile = gen_synthetic_surface(&cfg, &PricingGrid::default())
            .unwrap()
            .surface
            .smiles[0]
            .clone();
        smile.points.truncate(3);
        let r = calibrate_tenor(&smile, 0.5, default_init(&smile), &CalibrationConfig::default());
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn noiseless_smile_recovers_truth() {
        let cfg = SyntheticConfig {
            truth: CurveSpec::default(),
            maturities: vec![1.0 / 12.0],
            noise_bps: 0.0,
            ..Default::default()
        };
        let syn = gen_synthetic_surface(&cfg, &PricingGrid::default()).unwrap();
        let smile = &syn.surface.smiles[0];
        let fit = calibrate_tenor(smile, 0.5, default_init(smile), &CalibrationConfig::default()).unwrap();
        let truth = &syn.truth.tenors[0];
        for (got, want) in [
            (fit.params.sigma, truth.sigma),
            (fit.params.k, truth.k),
            (fit.params.eta, truth.eta),
        ] {
            assert!((got / want - 1.0).abs() < 0.01, "got {got}, want {want}");
        }
        assert!(fit.mse < 1e-12);
    }
}
