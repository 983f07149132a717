//! The additive tempered stable subordinator (TSS) and analytic checks of
//! when an ATS process can be written as an independently time-changed
//! Brownian motion.
//!
//! The TSS has generating triplet `(0, V_t, Gamma_t)` with Lévy density
//!
//! ```text
//! V_t(x) = t sigma_t^(2 alpha) / Gamma(1 - alpha) * ((1 - alpha) / k_t)^(1 - alpha)
//!          * exp(-(1 - alpha) x / (sigma_t^2 k_t)) / x^(1 + alpha),   x > 0
//! ```
//!
//! and `Gamma_t = int_0^1 x V_t(x) dx`, so its truncated drift `b_t` vanishes.
//! Laplace exponents follow the convention `ln E[exp(-w Z_t)]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::model::{log_l, ModelParams};
use crate::quad;

/// A deterministic function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    /// `base * t^exponent`.
    Power { base: f64, exponent: f64 },
    /// Piecewise linear through `(times[i], values[i])`, flat outside.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Curve {
    pub fn constant(v: f64) -> Self {
        Curve::Power { base: v, exponent: 0.0 }
    }

    pub fn power(base: f64, exponent: f64) -> Self {
        Curve::Power { base, exponent }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated curve needs equal-length, strictly increasing knots".into(),
            ));
        }
        Ok(Curve::Tabulated { times, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Curve::Power { base, exponent } => {
                if *exponent == 0.0 {
                    *base
                } else {
                    base * t.powf(*exponent)
                }
            }
            Curve::Tabulated { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let i = times.partition_point(|&x| x <= t);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }
}

/// Definition of a TSS through its volatility and variance-of-time curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TssSpec {
    pub alpha: f64,
    pub sigma: Curve,
    pub k: Curve,
}

impl TssSpec {
    pub fn new(alpha: f64, sigma: Curve, k: Curve) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        Ok(TssSpec { alpha, sigma, k })
    }

    /// Curves taken from a fitted model, interpolated between maturities.
    pub fn from_model(params: &ModelParams) -> Result<Self> {
        let times: Vec<f64> = params.tenors.iter().map(|t| t.maturity).collect();
        let sigma = Curve::tabulated(times.clone(), params.tenors.iter().map(|t| t.sigma).collect())?;
        let k = Curve::tabulated(times, params.tenors.iter().map(|t| t.k).collect())?;
        TssSpec::new(params.alpha, sigma, k)
    }

    /// `(sigma_t, k_t)` at time `t`.
    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("time must be > 0, got {t}")));
        }
        let sigma = self.sigma.eval(t);
        let k = self.k.eval(t);
        if !(sigma > 0.0 && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "curves must be positive: sigma_t = {sigma}, k_t = {k} at t = {t}"
            )));
        }
        Ok((sigma, k))
    }

    /// Prefactor `C` and tempering rate `c` of `V_t(x) = C exp(-c x) / x^(1+alpha)`.
    fn density_factors(&self, t: f64) -> Result<(f64, f64)> {
        let (sigma, k) = self.at(t)?;
        let a = self.alpha;
        let s2 = sigma * sigma;
        let pref = t * s2.powf(a) / gamma(1.0 - a) * ((1.0 - a) / k).powf(1.0 - a);
        Ok((pref, (1.0 - a) / (s2 * k)))
    }
}

/// One failed admissibility condition of the TSS definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// 1: `t sigma_t^2 = o(1)`; 2: `t sigma_t^(2 alpha) / k_t^(1-alpha)`
    /// is `o(1)` and non-decreasing; 3: `sigma_t^2 k_t` non-decreasing.
    pub condition: u8,
    pub t: f64,
    pub message: String,
}

/// Thresholds for the grid-based admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerance {
    /// The `o(1)` quantities must be below this at the smallest grid point.
    pub small_t: f64,
    /// Relative slack allowed on pairwise monotonicity.
    pub monotone_rel: f64,
}

impl Default for ValidationTolerance {
    fn default() -> Self {
        ValidationTolerance {
            small_t: 1e-3,
            monotone_rel: 1e-9,
        }
    }
}

/// Checks the three TSS admissibility conditions on `t_grid`.
/// Violations are reported as data; an empty list means admissible.
pub fn validate_tss(spec: &TssSpec, t_grid: &[f64], tol: ValidationTolerance) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some(&t0) = t_grid.first() else {
        return out;
    };
    let a = spec.alpha;
    let q1 = |t: f64| t * spec.sigma.eval(t).powi(2);
    let q2 = |t: f64| t * spec.sigma.eval(t).powf(2.0 * a) / spec.k.eval(t).powf(1.0 - a);
    let q3 = |t: f64| spec.sigma.eval(t).powi(2) * spec.k.eval(t);

    let v1 = q1(t0);
    if !(v1 < tol.small_t) {
        out.push(Violation {
            condition: 1,
            t: t0,
            message: format!("t sigma_t^2 = {v1:.3e} at smallest grid point"),
        });
    }
    let v2 = q2(t0);
    if !(v2 < tol.small_t) {
        out.push(Violation {
            condition: 2,
            t: t0,
            message: format!("t sigma_t^(2a)/k_t^(1-a) = {v2:.3e} at smallest grid point"),
        });
    }
    for w in t_grid.windows(2) {
        let (s, t) = (w[0], w[1]);
        for (cond, q) in [(2u8, &q2 as &dyn Fn(f64) -> f64), (3u8, &q3)] {
            let (qs, qt) = (q(s), q(t));
            if qt < qs - tol.monotone_rel * qs.abs() {
                out.push(Violation {
                    condition: cond,
                    t,
                    message: format!("decreases from {qs:.6e} at t={s} to {qt:.6e} at t={t}"),
                });
            }
        }
    }
    out
}

/// Lévy density `V_t(x)` of the TSS.
pub fn tss_levy_density(x: f64, t: f64, spec: &TssSpec) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Lévy density needs x > 0, got {x}")));
    }
    let (pref, rate) = spec.density_factors(t)?;
    Ok(pref * (-rate * x).exp() / x.powf(1.0 + spec.alpha))
}

const QUAD_TOL: f64 = 1e-10;

/// Drift `Gamma_t = int_0^1 x V_t(x) dx` by adaptive quadrature after the
/// substitution `y = x^(1-alpha)`, which removes the `x^-alpha` singularity.
pub fn tss_gamma_drift(t: f64, spec: &TssSpec) -> Result<f64> {
    let (pref, rate) = spec.density_factors(t)?;
    let a = spec.alpha;
    let p = 1.0 / (1.0 - a);
    // the integral is of the order of the decay length
    let tol = (QUAD_TOL / pref.max(1e-300)).min(1e-14 * rate.powf(-1.0 / p));
    let mut integral = 0.0;
    for w in decay_edges(rate, p).windows(2) {
        integral += quad::adaptive(|y: f64| (-rate * y.powf(p)).exp(), w[0], w[1], tol, 0.0)?;
    }
    Ok(pref * p * integral)
}

/// Breakpoints on `[0, 1]` for integrands decaying like `exp(-rate y^p)`,
/// geometric from the decay length so a narrow peak at the origin is seen.
fn decay_edges(rate: f64, p: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut y = rate.powf(-1.0 / p);
    if !(y > 0.0 && y.is_finite()) {
        return vec![0.0, 1.0];
    }
    while y < 1.0 {
        edges.push(y);
        y *= 4.0;
    }
    edges.push(1.0);
    edges
}

/// Closed-form `ln E[exp(-w Z_t)]`:
/// `(d_t/alpha)(1 - (1 + w e_t)^alpha)` with `d_t = t(1-alpha)/k_t`,
/// `e_t = sigma_t^2 k_t/(1-alpha)`, and `-d_t ln(1 + w e_t)` for alpha = 0.
pub fn tss_log_laplace(w: Complex64, t: f64, spec: &TssSpec) -> Result<Complex64> {
    let (sigma, k) = spec.at(t)?;
    // identical algebra to ln L_t evaluated at w sigma_t^2
    log_l(w * (sigma * sigma), t, k, spec.alpha)
}

/// `(exp(i v) - 1) / x` with `v = u x`, stable as `x -> 0`.
fn chf_kernel(u: f64, x: f64) -> Complex64 {
    let v = u * x;
    if v.abs() < 1e-8 {
        return Complex64::new(-0.5 * u * v, u);
    }
    let h = (0.5 * v).sin();
    Complex64::new(-2.0 * h * h, v.sin()) / x
}

/// `int_{x>0} (exp(iux) - 1) V_t(x) dx` by quadrature, i.e. the
/// characteristic exponent of a subordinator with zero truncated drift.
pub fn tss_exponent_by_integral(u: f64, t: f64, spec: &TssSpec) -> Result<Complex64> {
    let (pref, rate) = spec.density_factors(t)?;
    let a = spec.alpha;
    let p = 1.0 / (1.0 - a);
    let tol = QUAD_TOL / pref.max(1e-300);
    // (0, 1]: x = y^p, dx = p y^(p-1) dy and x^(-1-a) dx = p (1/x) dy
    let mut near = Complex64::new(0.0, 0.0);
    for w in decay_edges(rate, p).windows(2) {
        near += quad::adaptive(
            |y: f64| {
                if y == 0.0 {
                    return Complex64::new(0.0, u);
                }
                let x = y.powf(p);
                chf_kernel(u, x) * (-rate * x).exp()
            },
            w[0],
            w[1],
            tol,
            0.0,
        )?;
    }
    let near = near * p;
    // [1, x_max): exponential tempering makes the tail negligible beyond x_max
    let x_max = 1.0 + ((2.0 * pref / QUAD_TOL).max(1.0).ln() + 5.0) / rate;
    let far = quad::adaptive(
        |x: f64| {
            let v = u * x;
            let h = (0.5 * v).sin();
            Complex64::new(-2.0 * h * h, v.sin()) * ((-rate * x).exp() / x.powf(1.0 + a))
        },
        1.0,
        x_max,
        tol,
        0.0,
    )?;
    Ok((near + far) * pref)
}

/// Generating triplet `(A_t, nu_t, gamma_t)` of an additive process at a
/// fixed time, with the Lévy measure given by a density on `x > 0`.
pub struct GenericTriplet<'a> {
    pub diffusion: f64,
    pub density: Box<dyn Fn(f64) -> f64 + 'a>,
    pub drift: f64,
}

impl GenericTriplet<'_> {
    /// `b_t = gamma_t - int_0^1 x nu_t(dx)` by quadrature; `y = x^(1-alpha)`
    /// substitution is applied with the supplied singularity order.
    pub fn truncated_drift(&self, singularity: f64) -> Result<f64> {
        let p = 1.0 / (1.0 - singularity);
        let small = quad::adaptive(
            |y: f64| {
                if y == 0.0 {
                    return 0.0;
                }
                let x = y.powf(p);
                p * x * (self.density)(x) * x / y
            },
            0.0,
            1.0,
            QUAD_TOL,
            0.0,
        )?;
        Ok(self.drift - small)
    }

    /// Pure-jump with positive jumps only. Measure finiteness on `|x| ∧ 1` is
    /// taken from the density construction and not re-checked here.
    pub fn is_pure_jump_positive(&self) -> bool {
        self.diffusion == 0.0
    }
}

/// The TSS triplet at time `t`.
pub fn tss_triplet(t: f64, spec: &TssSpec) -> Result<GenericTriplet<'_>> {
    let drift = tss_gamma_drift(t, spec)?;
    spec.at(t)?;
    Ok(GenericTriplet {
        diffusion: 0.0,
        density: Box::new(move |x| tss_levy_density(x, t, spec).unwrap_or(0.0)),
        drift,
    })
}

/// Outcome of matching an ATS against a Brownian motion time-changed by an
/// independent subordinator, `W(a Z_t) + b Z_t + c_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Representable {
        a: f64,
        b: f64,
        /// Required `b/a` per tenor.
        ratios: Vec<f64>,
    },
    NotRepresentable {
        /// Maturities whose required `b/a` ratios contradict each other.
        witness: (f64, f64),
        ratios: Vec<f64>,
        relative_spread: f64,
    },
}

impl Verdict {
    pub fn is_representable(&self) -> bool {
        matches!(self, Verdict::Representable { .. })
    }
}

/// Default relative tolerance on the spread of `eta_T` across tenors.
pub const ETA_CONSTANCY_TOL: f64 = 1e-6;

/// Matching the ATS characteristic function through `M_t(iub + u^2 a/2)`
/// forces `b/a = -(1/2 + eta_T)` at every tenor, which is only possible for
/// a constant `eta`.
pub fn representability_verdict(params: &ModelParams, tol: f64) -> Result<Verdict> {
    if params.tenors.len() < 2 {
        return Err(Error::InsufficientData(
            "representability needs at least two tenors".into(),
        ));
    }
    let ratios: Vec<f64> = params.tenors.iter().map(|t| -(0.5 + t.eta)).collect();
    let (mut lo, mut hi) = (0, 0);
    for (i, t) in params.tenors.iter().enumerate() {
        if t.eta < params.tenors[lo].eta {
            lo = i;
        }
        if t.eta > params.tenors[hi].eta {
            hi = i;
        }
    }
    let n = params.tenors.len() as f64;
    let mean = params.tenors.iter().map(|t| t.eta).sum::<f64>() / n;
    let spread = (params.tenors[hi].eta - params.tenors[lo].eta) / mean;
    if spread <= tol {
        Ok(Verdict::Representable {
            a: 1.0,
            b: -(0.5 + mean),
            ratios,
        })
    } else {
        let (i, j) = (lo.min(hi), lo.max(hi));
        Ok(Verdict::NotRepresentable {
            witness: (params.tenors[i].maturity, params.tenors[j].maturity),
            ratios,
            relative_spread: spread,
        })
    }
}

/// Time-dependent coefficients of `W(a_t Z_t) + b_t Z_t + c_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPath {
    pub a: Curve,
    pub b: Curve,
    pub c: Curve,
}

/// `|E[e^{iu1(f_t - f_s) + iu2 f_s}] - E[e^{iu1(f_t - f_s)}] E[e^{iu2 f_s}]|`
/// for `f_t = W(a_t Z_t) + b_t Z_t + c_t`, evaluated through products of
/// TSS Laplace transforms. Zero when the increment is independent of `f_s`.
pub fn independence_gap(
    s: f64,
    t: f64,
    u1: Complex64,
    u2: Complex64,
    path: &CoefficientPath,
    spec: &TssSpec,
) -> Result<f64> {
    if !(0.0 < s && s < t) {
        return Err(Error::InvalidParameter(format!("need 0 < s < t, got s={s}, t={t}")));
    }
    let (a_s, a_t) = (path.a.eval(s), path.a.eval(t));
    if !(a_s > 0.0 && a_t > 0.0) {
        return Err(Error::InvalidParameter("a_t must be positive".into()));
    }
    let (b_s, b_t) = (path.b.eval(s), path.b.eval(t));
    let i = Complex64::i();
    // exponents multiplying Z_s in the conditional characteristic functions
    let x1 = i * u1 * (b_t - b_s) - u1 * u1 * (0.5 * (a_t - a_s));
    let x2 = i * u2 * b_s - u2 * u2 * (0.5 * a_s);
    let y = i * u1 * b_t - u1 * u1 * (0.5 * a_t);
    // E[exp(x Z_s)] = exp(L_s(-x))
    let m_s = |x: Complex64| tss_log_laplace(-x, s, spec);
    let increment = (tss_log_laplace(-y, t, spec)? - tss_log_laplace(-y, s, spec)?).exp();
    let left = increment * m_s(x1 + x2)?.exp();
    let right = increment * (m_s(x1)? + m_s(x2)?).exp();
    Ok((left - right).norm())
}
