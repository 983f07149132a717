//! European option pricing: damped-contour Fourier inversion of the ATS
//! characteristic function, Black reference prices, implied volatility,
//! forward delta and the at-the-money skew.
//!
//! With log-moneyness `x = ln(K/F)` and damping `a > 0`, the undiscounted
//! call price per unit forward is
//!
//! ```text
//! c(x) = exp(-a x) / pi * int_0^inf Re[ exp(-i v x) phi(v - i(a+1)) / ((a + iv)(a + 1 + iv)) ] dv
//! ```
//!
//! where `phi` is the characteristic function of `ln(S_T / F)`. The
//! chf-dependent part of the integrand is shared by every strike of a
//! maturity, so smiles are priced from one set of node values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Bound, Error, Result};
use crate::model::{ats_log_chf, moment_strip_upper, ModelParams, TenorParams};
use crate::quad;

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// 16-point Gauss-Legendre on geometrically growing panels.
    #[default]
    GaussLegendre,
    /// Adaptive Gauss-Kronrod per strike; slower, used for cross-checks.
    AdaptiveKronrod,
}

/// Discretisation of the Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingGrid {
    /// Damping exponent `a` of the call transform. Reduced automatically to
    /// stay inside the exponential-moment strip of the model.
    pub damping: f64,
    /// Upper integration bound; `None` derives it from the chf decay.
    pub truncation: Option<f64>,
    /// Minimum number of quadrature nodes. More are used when the strike
    /// range or the truncation bound would leave panels under-resolved.
    pub nodes: usize,
    pub rule: QuadratureRule,
}

impl Default for PricingGrid {
    fn default() -> Self {
        PricingGrid {
            damping: 0.75,
            truncation: None,
            nodes: 2048,
            rule: QuadratureRule::GaussLegendre,
        }
    }
}

impl PricingGrid {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0) || self.nodes == 0 || matches!(self.truncation, Some(t) if !(t > 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid pricing grid {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuropeanOption {
    pub strike: f64,
    pub maturity: f64,
    pub is_call: bool,
    pub forward: f64,
    pub discount: f64,
}

impl EuropeanOption {
    pub fn new(strike: f64, maturity: f64, is_call: bool, forward: f64, discount: f64) -> Result<Self> {
        let opt = EuropeanOption {
            strike,
            maturity,
            is_call,
            forward,
            discount,
        };
        opt.validate()?;
        Ok(opt)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.strike > 0.0
            && self.maturity > 0.0
            && self.forward > 0.0
            && self.discount > 0.0
            && self.discount <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "option needs K, T, F > 0 and D in (0, 1]: {self:?}"
            )))
        }
    }

    pub fn intrinsic(&self) -> f64 {
        let fwd = if self.is_call {
            self.forward - self.strike
        } else {
            self.strike - self.forward
        };
        self.discount * fwd.max(0.0)
    }

    pub fn upper_bound(&self) -> f64 {
        self.discount * if self.is_call { self.forward } else { self.strike }
    }

    fn with_call(&self, is_call: bool) -> Self {
        EuropeanOption { is_call, ..*self }
    }
}

/// Black price on the forward, discounted by `D`.
pub fn black_price(opt: &EuropeanOption, sigma: f64) -> f64 {
    let (f, k, d) = (opt.forward, opt.strike, opt.discount);
    let s = sigma * opt.maturity.sqrt();
    if !(s > 0.0) {
        return opt.intrinsic();
    }
    let d1 = (f / k).ln() / s + 0.5 * s;
    let d2 = d1 - s;
    if opt.is_call {
        d * (f * norm_cdf(d1) - k * norm_cdf(d2))
    } else {
        d * (k * norm_cdf(-d2) - f * norm_cdf(-d1))
    }
}

/// Forward (undiscounted) Black delta `N(d1)`. Puts are mapped to the
/// call-equivalent delta so both can be filtered with one band.
pub fn bs_delta(opt: &EuropeanOption, sigma: f64) -> f64 {
    let s = sigma * opt.maturity.sqrt();
    let m = (opt.forward / opt.strike).ln();
    if !(s > 0.0) {
        return if m > 0.0 {
            1.0
        } else if m < 0.0 {
            0.0
        } else {
            0.5
        };
    }
    norm_cdf(m / s + 0.5 * s)
}

const IV_MAX_ITER: usize = 200;
const IV_PRICE_TOL: f64 = 1e-10;

/// Black implied volatility by safeguarded Newton iteration on the
/// out-of-the-money side of parity.
pub fn implied_vol(price: f64, opt: &EuropeanOption) -> Result<f64> {
    opt.validate()?;
    let lower = opt.intrinsic();
    let upper = opt.upper_bound();
    if !(price > lower) {
        return Err(Error::PriceOutOfBounds {
            price,
            bound: Bound::Lower,
            limit: lower,
        });
    }
    if !(price < upper) {
        return Err(Error::PriceOutOfBounds {
            price,
            bound: Bound::Upper,
            limit: upper,
        });
    }
    // OTM option carries the time value without intrinsic cancellation
    let otm_call = opt.strike >= opt.forward;
    let (target, otm) = if otm_call == opt.is_call {
        (price, *opt)
    } else {
        let parity = opt.discount * (opt.forward - opt.strike);
        let p = if opt.is_call { price - parity } else { price + parity };
        (p, opt.with_call(otm_call))
    };
    let sqrt_t = opt.maturity.sqrt();
    let value = |s: f64| black_price(&otm, s / sqrt_t) - target;
    let vega = |s: f64| {
        let d1 = (otm.forward / otm.strike).ln() / s + 0.5 * s;
        otm.discount * otm.forward * norm_pdf(d1)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    while value(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::NonConvergence(format!(
                "implied vol bracket exceeded for price {price}"
            )));
        }
    }
    let m = (otm.forward / otm.strike).ln().abs();
    let mut s = (2.0 * m)
        .sqrt()
        .max((2.0 * PI).sqrt() * target / (otm.discount * otm.forward));
    if !(s > lo && s < hi) {
        s = 0.5 * (lo + hi);
    }
    for _ in 0..IV_MAX_ITER {
        let f = value(s);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let v = vega(s);
        let mut next = s - f / v;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let done = (next - s).abs() <= 1e-15 * s || hi - lo <= 1e-15 * hi;
        s = next;
        if done {
            break;
        }
    }
    let resid = value(s).abs();
    if resid > IV_PRICE_TOL {
        return Err(Error::NonConvergence(format!(
            "implied vol residual {resid:.3e} for price {price}"
        )));
    }
    Ok(s / sqrt_t)
}

/// Chf node values of the damped call transform for one maturity.
struct TransformNodes {
    damping: f64,
    nodes: Vec<f64>,
    /// Quadrature weight times the chf part of the integrand.
    values: Vec<Complex64>,
}

const MAX_PANELS: usize = 1 << 16;
const TAIL_TOL: f64 = 1e-14;

fn effective_damping(tenor: &TenorParams, alpha: f64, requested: f64) -> f64 {
    let p_max = moment_strip_upper(tenor, alpha);
    requested.min(0.5 * (p_max - 1.0))
}

fn transform_kernel(v: f64, a: f64, tenor: &TenorParams, alpha: f64) -> Result<Complex64> {
    let u = Complex64::new(v, -(a + 1.0));
    let chf = ats_log_chf(u, tenor, alpha)?.exp();
    Ok(chf / (Complex64::new(a, v) * Complex64::new(a + 1.0, v)))
}

fn truncation_bound(tenor: &TenorParams, alpha: f64, a: f64, scale: f64) -> Result<f64> {
    // grow until the tail mass estimate v |psi(v)| is negligible
    let mut v = scale;
    let cap = 1e6 * scale;
    while v < cap {
        let env = transform_kernel(v, a, tenor, alpha)?.norm();
        if env * v < TAIL_TOL {
            break;
        }
        v *= 1.25;
    }
    Ok(v)
}

/// Panel edges on `[0, upper]`: fine panels on the chf core growing
/// geometrically up to the width that still resolves the `exp(-i v x)`
/// oscillation of the widest strike.
fn panel_edges(scale: f64, damping: f64, upper: f64, max_abs_logm: f64, min_panels: usize) -> Vec<f64> {
    let w_osc = 6.0 / max_abs_logm.max(0.05);
    // the damping poles sit at distance `damping` from the real axis
    let mut w = (0.5 * scale).min(0.5 * damping).min(w_osc);
    let mut edges = vec![0.0];
    let mut edge = 0.0;
    while edge < upper && edges.len() <= MAX_PANELS {
        edge = (edge + w).min(upper);
        edges.push(edge);
        w = (w * 1.05).min(w_osc);
    }
    let panels = edges.len() - 1;
    if panels >= min_panels {
        return edges;
    }
    let split = min_panels.div_ceil(panels);
    let mut fine = Vec::with_capacity(panels * split + 1);
    fine.push(0.0);
    for pair in edges.windows(2) {
        let h = (pair[1] - pair[0]) / split as f64;
        for j in 1..=split {
            fine.push(if j == split { pair[1] } else { pair[0] + h * j as f64 });
        }
    }
    fine
}

fn transform_nodes(tenor: &TenorParams, alpha: f64, grid: &PricingGrid, max_abs_logm: f64) -> Result<TransformNodes> {
    let a = effective_damping(tenor, alpha, grid.damping);
    // chf decay scale of a Brownian component with the same total variance
    let scale = 1.0 / (tenor.sigma * tenor.maturity.sqrt()).max(1e-8);
    let upper = match grid.truncation {
        Some(t) => t,
        None => truncation_bound(tenor, alpha, a, scale)?,
    };
    let edges = panel_edges(scale, a, upper, max_abs_logm, grid.nodes.div_ceil(quad::GL_POINTS));
    let (nodes, weights) = quad::panel_gauss_legendre(&edges);
    let values = nodes
        .iter()
        .zip(&weights)
        .map(|(&v, &w)| transform_kernel(v, a, tenor, alpha).map(|k| k * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransformNodes {
        damping: a,
        nodes,
        values,
    })
}

fn call_from_nodes(tn: &TransformNodes, x: f64) -> f64 {
    let mut acc = 0.0;
    for (&v, z) in tn.nodes.iter().zip(&tn.values) {
        let (s, c) = (v * x).sin_cos();
        // Re[(cos - i sin)(re + i im)]
        acc += c * z.re + s * z.im;
    }
    (-tn.damping * x).exp() / PI * acc
}

fn call_adaptive(tenor: &TenorParams, alpha: f64, grid: &PricingGrid, x: f64) -> Result<f64> {
    let a = effective_damping(tenor, alpha, grid.damping);
    let scale = 1.0 / (tenor.sigma * tenor.maturity.sqrt()).max(1e-8);
    let upper = match grid.truncation {
        Some(t) => t,
        None => truncation_bound(tenor, alpha, a, scale)?,
    };
    // evaluation errors surface as NaN and fail the quadrature
    let integrand = |v: f64| match transform_kernel(v, a, tenor, alpha) {
        Ok(z) => (Complex64::new(0.0, -v * x).exp() * z).re,
        Err(_) => f64::NAN,
    };
    // geometric breakpoints keep the first panels on the chf core
    let mut integral = 0.0;
    let (mut lo, mut hi) = (0.0, scale.min(upper));
    while lo < upper {
        // the kernel modulus decreases in v, bounding the piece by env(lo) (hi - lo)
        let bound = transform_kernel(lo, a, tenor, alpha)?.norm() * (hi - lo);
        if bound < 1e-15 {
            break;
        }
        integral += quad::adaptive(integrand, lo, hi, (1e-3 * bound).clamp(1e-14, 1e-13), 0.0)?;
        lo = hi;
        hi = (2.0 * hi).min(upper);
    }
    Ok((-a * x).exp() / PI * integral)
}

/// Clamps round-off outside the no-arbitrage band; larger excursions are
/// reported as numerical failures.
fn settle(price: f64, lower: f64, upper: f64) -> Result<f64> {
    let slack = 1e-9 * upper;
    if !price.is_finite() || price < lower - slack || price > upper + slack {
        return Err(Error::NonConvergence(format!(
            "Fourier price {price} outside [{lower}, {upper}]"
        )));
    }
    Ok(price.clamp(lower, upper))
}

/// Undiscounted call prices per unit forward at log-moneyness `xs`.
pub fn normalized_calls(tenor: &TenorParams, alpha: f64, xs: &[f64], grid: &PricingGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    tenor.validate()?;
    let raw: Vec<f64> = match grid.rule {
        QuadratureRule::GaussLegendre => {
            let max_abs = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let tn = transform_nodes(tenor, alpha, grid, max_abs)?;
            xs.iter().map(|&x| call_from_nodes(&tn, x)).collect()
        }
        QuadratureRule::AdaptiveKronrod => xs
            .iter()
            .map(|&x| call_adaptive(tenor, alpha, grid, x))
            .collect::<Result<_>>()?,
    };
    raw.into_iter()
        .zip(xs)
        .map(|(c, &x)| settle(c, (1.0 - x.exp()).max(0.0), 1.0))
        .collect()
}

/// Call and put prices for several strikes of one maturity.
pub fn price_strikes(
    tenor: &TenorParams,
    alpha: f64,
    forward: f64,
    discount: f64,
    strikes: &[f64],
    grid: &PricingGrid,
) -> Result<Vec<(f64, f64)>> {
    if strikes.iter().any(|&k| !(k > 0.0)) || !(forward > 0.0) || !(discount > 0.0 && discount <= 1.0) {
        return Err(Error::InvalidParameter(
            "strikes, forward and discount must be positive".into(),
        ));
    }
    let xs: Vec<f64> = strikes.iter().map(|k| (k / forward).ln()).collect();
    let calls = normalized_calls(tenor, alpha, &xs, grid)?;
    Ok(calls
        .into_iter()
        .zip(strikes)
        .map(|(c, &k)| {
            let call = discount * forward * c;
            let put = call - discount * (forward - k);
            (call, put.max(0.0))
        })
        .collect())
}

/// Fourier price of a European option under the ATS model. The option
/// maturity must match one of the model tenors exactly.
pub fn fourier_price(opt: &EuropeanOption, params: &ModelParams, grid: &PricingGrid) -> Result<f64> {
    opt.validate()?;
    let tenor = params.tenor(opt.maturity)?;
    let (call, put) = price_strikes(tenor, params.alpha, opt.forward, opt.discount, &[opt.strike], grid)?[0];
    Ok(if opt.is_call { call } else { put })
}

/// At-the-money implied volatility skew.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtmSkew {
    pub maturity: f64,
    pub atm_vol: f64,
    /// `dIV / d ln(K/F)` at `K = F`.
    pub per_log_moneyness: f64,
    /// `dIV / dK` at `K = F` for a unit forward; divide `per_log_moneyness`
    /// by `F` for other forwards.
    pub per_unit_strike: f64,
}

/// Default relative strike bump of [`atm_skew`].
pub const DEFAULT_SKEW_BUMP: f64 = 1e-3;

/// Central difference of the model implied volatility in log-strike at the
/// forward.
pub fn atm_skew(params: &ModelParams, maturity: f64, bump: f64, grid: &PricingGrid) -> Result<AtmSkew> {
    if !(bump > 0.0 && bump < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "skew bump must be in (0, 0.5), got {bump}"
        )));
    }
    let tenor = params.tenor(maturity)?;
    let xs = [-bump, 0.0, bump];
    let calls = normalized_calls(tenor, params.alpha, &xs, grid)?;
    let iv = |x: f64, c: f64| {
        let opt = EuropeanOption::new(x.exp(), maturity, true, 1.0, 1.0)?;
        implied_vol(c, &opt)
    };
    let down = iv(xs[0], calls[0])?;
    let atm = iv(xs[1], calls[1])?;
    let up = iv(xs[2], calls[2])?;
    let per_log = (up - down) / (2.0 * bump);
    Ok(AtmSkew {
        maturity,
        atm_vol: atm,
        per_log_moneyness: per_log,
        per_unit_strike: per_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CurveSpec;
    use approx::assert_relative_eq;

    fn atm(t: f64) -> EuropeanOption {
        EuropeanOption::new(100.0, t, true, 100.0, 1.0).unwrap()
    }

    fn single(alpha: f64, t: f64, sigma: f64, k: f64, eta: f64) -> ModelParams {
        ModelParams::new(alpha, vec![TenorParams::new(t, sigma, k, eta, alpha).unwrap()]).unwrap()
    }

    #[test]
    fn black_reference_values() {
        // 100 (2 N(0.1) - 1)
        let want = 100.0 * (2.0 * norm_cdf(0.1) - 1.0);
        assert_relative_eq!(black_price(&atm(1.0), 0.2), want, epsilon = 1e-12);
        assert!((want - 7.9656).abs() < 1e-4);
        let itm = EuropeanOption::new(90.0, 1.0, true, 100.0, 0.95).unwrap();
        assert_relative_eq!(black_price(&itm, 0.0), 0.95 * 10.0, epsilon = 1e-14);
        let put = itm.with_call(false);
        let parity = black_price(&itm, 0.3) - black_price(&put, 0.3);
        assert_relative_eq!(parity, 0.95 * 10.0, epsilon = 1e-12);
    }

    #[test]
    fn implied_vol_round_trips() {
        for &(k, call) in &[
            (100.0, true),
            (80.0, false),
            (80.0, true),
            (130.0, true),
            (130.0, false),
        ] {
            let opt = EuropeanOption::new(k, 0.7, call, 100.0, 0.97).unwrap();
            let p = black_price(&opt, 0.2);
            assert!((implied_vol(p, &opt).unwrap() - 0.2).abs() < 1e-8, "K={k} call={call}");
        }
        let opt = atm(1.0);
        let high = implied_vol(100.0 - 1e-6, &opt).unwrap();
        assert!(high > 5.0);
        assert!(matches!(
            implied_vol(0.0, &opt),
            Err(Error::PriceOutOfBounds {
                bound: Bound::Lower,
                ..
            })
        ));
        assert!(matches!(
            implied_vol(100.0, &opt),
            Err(Error::PriceOutOfBounds {
                bound: Bound::Upper,
                ..
            })
        ));
    }

    #[test]
    fn delta_examples() {
        let d = bs_delta(&atm(0.5), 0.3);
        assert_relative_eq!(d, norm_cdf(0.3 * 0.5f64.sqrt() / 2.0), epsilon = 1e-15);
        let deep = EuropeanOption::new(1e-8, 1.0, true, 100.0, 1.0).unwrap();
        assert!(bs_delta(&deep, 0.2) > 1.0 - 1e-12);
        let otm = EuropeanOption::new(120.0, 0.25, true, 100.0, 1.0).unwrap();
        let d = bs_delta(&otm, 0.2);
        assert!(d > 0.0 && d < 0.1, "{d}");
        // put maps to the same call-equivalent delta
        assert_eq!(bs_delta(&otm.with_call(false), 0.2), d);
    }

    #[test]
    fn black_limit_of_fourier_price() {
        let p = single(0.5, 1.0, 0.2, 1e-8, 1.0);
        let got = fourier_price(&atm(1.0), &p, &PricingGrid::default()).unwrap();
        assert!((got - 7.9656).abs() < 1e-3, "{got}");
        let iv = implied_vol(got, &atm(1.0)).unwrap();
        assert!((iv - 0.2).abs() < 1e-4);
    }

    #[test]
    fn parity_bounds_and_monotonicity() {
        let p = single(0.5, 0.5, 0.2, 0.8, 1.5);
        let tenor = &p.tenors[0];
        let strikes: Vec<f64> = (0..41).map(|i| 60.0 + 2.0 * i as f64).collect();
        let prices = price_strikes(tenor, 0.5, 100.0, 0.98, &strikes, &PricingGrid::default()).unwrap();
        let mut last = f64::INFINITY;
        for (&k, &(c, put)) in strikes.iter().zip(&prices) {
            assert!((c - put - 0.98 * (100.0 - k)).abs() < 1e-10 || put == 0.0);
            assert!(c >= (0.98 * (100.0 - k)).max(0.0) && c <= 98.0);
            assert!(c <= last + 1e-12);
            last = c;
        }
    }

    #[test]
    fn zero_strike_call_is_discounted_forward() {
        let p = single(0.5, 1.0, 0.2, 1.0, 1.0);
        let opt = EuropeanOption::new(1e-6, 1.0, true, 100.0, 0.9).unwrap();
        let c = fourier_price(&opt, &p, &PricingGrid::default()).unwrap();
        assert!((c - 90.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn adaptive_rule_agrees_with_fixed_nodes() {
        let p = single(0.0, 0.25, 0.25, 0.3, 0.8);
        let tenor = &p.tenors[0];
        let xs = [-0.2, -0.05, 0.0, 0.1, 0.25];
        let fixed = normalized_calls(tenor, 0.0, &xs, &PricingGrid::default()).unwrap();
        let grid = PricingGrid {
            rule: QuadratureRule::AdaptiveKronrod,
            ..Default::default()
        };
        let adaptive = normalized_calls(tenor, 0.0, &xs, &grid).unwrap();
        for (a, b) in fixed.iter().zip(&adaptive) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn missing_tenor_is_an_error() {
        let p = single(0.5, 1.0, 0.2, 1.0, 1.0);
        assert!(matches!(
            fourier_price(&atm(0.5), &p, &PricingGrid::default()),
            Err(Error::MissingTenor(_))
        ));
    }

    #[test]
    fn skew_is_negative_and_shrinks_with_eta() {
        let grid = PricingGrid::default();
        let mut last = f64::NEG_INFINITY;
        for &eta in &[2.0, 1.0, 0.5, 0.1, 0.01] {
            let p = single(0.5, 0.25, 0.2, 0.5, eta);
            let s = atm_skew(&p, 0.25, DEFAULT_SKEW_BUMP, &grid).unwrap();
            assert!(s.per_log_moneyness < 0.0);
            assert!(s.per_log_moneyness > last, "eta {eta}");
            last = s.per_log_moneyness;
        }
    }

    #[test]
    fn skew_central_difference_is_second_order() {
        let curves = CurveSpec {
            sigma_bar: 0.2,
            k_bar: 0.5,
            eta_bar: 0.5,
            beta_sigma: 0.0,
            beta_k: 1.0,
            delta: -0.5,
        };
        let p = curves.model(0.5, &[0.1]).unwrap();
        let grid = PricingGrid::default();
        let s1 = atm_skew(&p, 0.1, 4e-3, &grid).unwrap().per_log_moneyness;
        let s2 = atm_skew(&p, 0.1, 2e-3, &grid).unwrap().per_log_moneyness;
        let s3 = atm_skew(&p, 0.1, 1e-3, &grid).unwrap().per_log_moneyness;
        // differences shrink by ~4 when the bump halves
        let r = (s1 - s2) / (s2 - s3);
        assert!(r > 3.0 && r < 5.0, "ratio {r}");
    }
}
