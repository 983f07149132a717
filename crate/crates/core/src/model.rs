//! Characteristic functions of the additive normal tempered stable (ATS)
//! process and its stationary (Lévy) special case.
//!
//! The log-characteristic function of the ATS at time `t` is
//!
//! ```text
//! ln E[exp(iu f_t)] = ln L_t(iu (1/2 + eta_t) sigma_t^2 + u^2 sigma_t^2 / 2; k_t, alpha) + iu phi_t t
//! ```
//!
//! where `ln L_t` is the log-Laplace exponent of a tempered stable law with
//! unit-mean-rate time change. All complex powers and logarithms are taken
//! on the principal branch; callers keep arguments inside the half-plane
//! `Re(1 + u k / (1 - alpha)) > 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `k` the tempered stable exponent is replaced by its
/// Brownian limit `-t u`.
pub const K_LIMIT: f64 = 1e-12;

/// `ln(1 + z)` without cancellation for small `|z|`.
pub(crate) fn ln_1p(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let re = 0.5 * (x * (2.0 + x) + y * y).ln_1p();
    let im = y.atan2(1.0 + x);
    Complex64::new(re, im)
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub(crate) fn exp_m1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let em1 = a.exp_m1();
    let half = (0.5 * b).sin();
    let re = em1 * b.cos() - 2.0 * half * half;
    let im = a.exp() * b.sin();
    Complex64::new(re, im)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )))
    }
}

/// Log-Laplace exponent `ln L_t(u; k, alpha)`.
///
/// For `alpha` in (0, 1): `(t/k) ((1-alpha)/alpha) (1 - (1 + u k/(1-alpha))^alpha)`;
/// for `alpha = 0`: `-(t/k) ln(1 + u k)`; and the limit `-t u` as `k -> 0`.
pub fn log_l(u: Complex64, t: f64, k: f64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("k must be >= 0, got {k}")));
    }
    if k < K_LIMIT {
        return Ok(-u * t);
    }
    let z = u * (k / (1.0 - alpha));
    if !(1.0 + z.re > 0.0) {
        return Err(Error::Domain(format!(
            "Re(1 + u k / (1 - alpha)) = {} <= 0 at u = {u}",
            1.0 + z.re
        )));
    }
    let lz = ln_1p(z);
    if alpha == 0.0 {
        Ok(-lz * (t / k))
    } else {
        // 1 - (1 + z)^alpha = -expm1(alpha ln(1 + z))
        Ok(-exp_m1(lz * alpha) * ((t / k) * (1.0 - alpha) / alpha))
    }
}

/// Parameters of one calibrated maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TenorParams {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub sigma: f64,
    pub k: f64,
    pub eta: f64,
    pub phi: f64,
}

impl TenorParams {
    /// Builds a tenor with `phi` fixed by the martingale condition.
    pub fn new(maturity: f64, sigma: f64, k: f64, eta: f64, alpha: f64) -> Result<Self> {
        let mut tenor = TenorParams {
            maturity,
            sigma,
            k,
            eta,
            phi: 0.0,
        };
        tenor.validate()?;
        tenor.phi = martingale_drift(sigma, k, eta, alpha, maturity)?;
        Ok(tenor)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.maturity > 0.0 && self.sigma > 0.0 && self.k >= 0.0 && self.eta > 0.0;
        if ok && self.phi.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "tenor requires T > 0, sigma > 0, k >= 0, eta > 0: {self:?}"
            )))
        }
    }
}

/// ATS model: a stability index plus per-maturity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams")]
pub struct ModelParams {
    pub alpha: f64,
    pub label: String,
    pub tenors: Vec<TenorParams>,
}

#[derive(Deserialize)]
struct RawTenor {
    #[serde(rename = "T")]
    maturity: f64,
    sigma: f64,
    k: f64,
    eta: f64,
    phi: Option<f64>,
}

#[derive(Deserialize)]
struct RawModelParams {
    alpha: f64,
    label: Option<String>,
    tenors: Vec<RawTenor>,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawModelParams) -> Result<Self> {
        let tenors = raw
            .tenors
            .into_iter()
            .map(|t| match t.phi {
                Some(phi) => {
                    let tenor = TenorParams {
                        maturity: t.maturity,
                        sigma: t.sigma,
                        k: t.k,
                        eta: t.eta,
                        phi,
                    };
                    tenor.validate().map(|_| tenor)
                }
                None => TenorParams::new(t.maturity, t.sigma, t.k, t.eta, raw.alpha),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut params = ModelParams::new(raw.alpha, tenors)?;
        if let Some(label) = raw.label {
            params.label = label;
        }
        Ok(params)
    }
}

/// Conventional name of the model for a given `alpha`.
pub fn model_label(alpha: f64) -> String {
    if alpha == 0.5 {
        "NIG".to_string()
    } else if alpha == 0.0 {
        "VG".to_string()
    } else {
        format!("ATS(alpha={alpha})")
    }
}

impl ModelParams {
    pub fn new(alpha: f64, tenors: Vec<TenorParams>) -> Result<Self> {
        check_alpha(alpha)?;
        for t in &tenors {
            t.validate()?;
        }
        if tenors.windows(2).any(|w| w[1].maturity <= w[0].maturity) {
            return Err(Error::InvalidParameter(
                "tenor maturities must be strictly increasing".into(),
            ));
        }
        Ok(ModelParams {
            alpha,
            label: model_label(alpha),
            tenors,
        })
    }

    /// Exact-match tenor lookup (relative tolerance 1e-12).
    pub fn tenor(&self, maturity: f64) -> Result<&TenorParams> {
        self.tenors
            .iter()
            .find(|t| (t.maturity - maturity).abs() <= 1e-12 * maturity.max(1.0))
            .ok_or(Error::MissingTenor(maturity))
    }
}

/// Power-law parameter curves `x_t = x_bar t^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveSpec {
    pub sigma_bar: f64,
    pub k_bar: f64,
    pub eta_bar: f64,
    pub beta_sigma: f64,
    pub beta_k: f64,
    /// Scaling exponent of the skew parameter.
    pub delta: f64,
}

impl Default for CurveSpec {
    /// Flat volatility 0.2, `k_t = t` and `eta_t = 0.5 t^(-1/2)`.
    fn default() -> Self {
        CurveSpec {
            sigma_bar: 0.2,
            k_bar: 1.0,
            eta_bar: 0.5,
            beta_sigma: 0.0,
            beta_k: 1.0,
            delta: -0.5,
        }
    }
}

impl CurveSpec {
    pub fn sigma(&self, t: f64) -> f64 {
        self.sigma_bar * t.powf(self.beta_sigma)
    }

    pub fn k(&self, t: f64) -> f64 {
        self.k_bar * t.powf(self.beta_k)
    }

    pub fn eta(&self, t: f64) -> f64 {
        self.eta_bar * t.powf(self.delta)
    }

    /// Evaluates the curves at `t` with `phi` set by the martingale condition.
    pub fn tenor_at(&self, t: f64, alpha: f64) -> Result<TenorParams> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("maturity must be > 0, got {t}")));
        }
        TenorParams::new(t, self.sigma(t), self.k(t), self.eta(t), alpha)
    }

    pub fn model(&self, alpha: f64, maturities: &[f64]) -> Result<ModelParams> {
        let tenors = maturities
            .iter()
            .map(|&t| self.tenor_at(t, alpha))
            .collect::<Result<Vec<_>>>()?;
        ModelParams::new(alpha, tenors)
    }
}

/// Drift per unit time that makes `exp(f_t)` a martingale.
pub fn martingale_drift(sigma: f64, k: f64, eta: f64, alpha: f64, t: f64) -> Result<f64> {
    let l = log_l(Complex64::new(eta * sigma * sigma, 0.0), t, k, alpha)?;
    Ok(-l.re / t)
}

fn ats_argument(u: Complex64, sigma: f64, eta: f64) -> Complex64 {
    let s2 = sigma * sigma;
    let i = Complex64::i();
    i * u * ((0.5 + eta) * s2) + u * u * (0.5 * s2)
}

/// Log-characteristic function of the ATS marginal at the tenor maturity.
pub fn ats_log_chf(u: Complex64, tenor: &TenorParams, alpha: f64) -> Result<Complex64> {
    let arg = ats_argument(u, tenor.sigma, tenor.eta);
    let l = log_l(arg, tenor.maturity, tenor.k, alpha)?;
    Ok(l + Complex64::i() * u * (tenor.phi * tenor.maturity))
}

/// Log-characteristic function of the Lévy normal tempered stable process
/// with time-constant parameters.
pub fn lts_log_chf(u: Complex64, t: f64, sigma: f64, k: f64, eta: f64, alpha: f64) -> Result<Complex64> {
    let phi = martingale_drift(sigma, k, eta, alpha, 1.0)?;
    let tenor = TenorParams {
        maturity: t,
        sigma,
        k,
        eta,
        phi,
    };
    tenor.validate()?;
    ats_log_chf(u, &tenor, alpha)
}

/// Upper edge `p_max` of the exponential-moment strip: `E[exp(p f_T)]` is
/// finite for `0 <= p < p_max`. Infinite in the Brownian limit.
pub fn moment_strip_upper(tenor: &TenorParams, alpha: f64) -> f64 {
    if tenor.k < K_LIMIT {
        return f64::INFINITY;
    }
    let b = 0.5 + tenor.eta;
    let c = (1.0 - alpha) / (tenor.k * tenor.sigma * tenor.sigma);
    b + (b * b + 2.0 * c).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_l_reference_values() {
        for &alpha in &[0.0, 0.3, 0.5, 0.9] {
            assert_eq!(log_l(c(0.0, 0.0), 1.3, 0.7, alpha).unwrap(), c(0.0, 0.0));
        }
        let vg = log_l(c(1.0, 0.0), 1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(vg.re, -std::f64::consts::LN_2, epsilon = 1e-15);
        let nig = log_l(c(1.0, 0.0), 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(nig.re, 1.0 - 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn log_l_errors() {
        assert!(matches!(
            log_l(c(1.0, 0.0), 1.0, 1.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(log_l(c(-1.0, 0.0), 1.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(log_l(c(-3.0, 2.0), 1.0, 1.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn small_k_matches_brownian_limit() {
        for &alpha in &[0.0, 0.5] {
            for &(re, im) in &[(0.1, 0.0), (1.0, 2.0), (3.0, -5.0), (0.02, 0.7)] {
                let u = c(re, im);
                let v = log_l(u, 0.8, 1e-8, alpha).unwrap();
                assert!((v + u * 0.8).norm() <= 1e-6, "alpha {alpha} u {u}");
                let lim = log_l(u, 0.8, 0.0, alpha).unwrap();
                assert_eq!(lim, -u * 0.8);
            }
        }
    }

    #[test]
    fn drift_examples() {
        let phi = martingale_drift(1.0, 1.0, 0.5, 0.0, 1.0).unwrap();
        assert_relative_eq!(phi, 1.5f64.ln(), epsilon = 1e-15);
        let phi0 = martingale_drift(0.3, 0.0, 0.7, 0.5, 2.0).unwrap();
        assert_relative_eq!(phi0, 0.7 * 0.09, epsilon = 1e-15);
        let tiny = martingale_drift(1e-9, 1.0, 0.7, 0.5, 2.0).unwrap();
        assert!(tiny.abs() < 1e-17);
    }

    #[test]
    fn ats_chf_closed_form_vg() {
        let tenor = TenorParams::new(1.0, 1.0, 1.0, 0.5, 0.0).unwrap();
        let got = ats_log_chf(c(1.0, 0.0), &tenor, 0.0).unwrap();
        let want = -c(1.5, 1.0).ln() + c(0.0, 1.5f64.ln());
        assert!((got - want).norm() < 1e-14);
        assert_eq!(ats_log_chf(c(0.0, 0.0), &tenor, 0.0).unwrap(), c(0.0, 0.0));
        let m = ats_log_chf(c(0.0, -1.0), &tenor, 0.0).unwrap();
        assert!(m.norm() < 1e-15);
    }

    #[test]
    fn lts_is_linear_in_time() {
        let u = c(1.7, 0.0);
        let one = lts_log_chf(u, 1.0, 0.25, 0.4, 0.8, 0.5).unwrap();
        let two = lts_log_chf(u, 2.0, 0.25, 0.4, 0.8, 0.5).unwrap();
        assert!((two - one * 2.0).norm() < 1e-14);
        assert_eq!(lts_log_chf(c(0.0, 0.0), 1.0, 0.25, 0.4, 0.8, 0.5).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn json_recomputes_missing_phi() {
        let js = r#"{"alpha":0.5,"tenors":[{"T":0.5,"sigma":0.2,"k":1.0,"eta":1.0},{"T":1.0,"sigma":0.2,"k":1.0,"eta":1.0,"phi":0.1}]}"#;
        let p: ModelParams = serde_json::from_str(js).unwrap();
        assert_eq!(p.label, "NIG");
        let want = martingale_drift(0.2, 1.0, 1.0, 0.5, 0.5).unwrap();
        assert_eq!(p.tenors[0].phi, want);
        assert_eq!(p.tenors[1].phi, 0.1);
        let bad = r#"{"alpha":0.5,"tenors":[{"T":1.0,"sigma":0.2,"k":1.0,"eta":1.0},{"T":0.5,"sigma":0.2,"k":1.0,"eta":1.0}]}"#;
        assert!(serde_json::from_str::<ModelParams>(bad).is_err());
        let back: ModelParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn moment_strip_contains_damped_contour() {
        let tenor = TenorParams::new(1.0, 0.2, 1.0, 1.0, 0.5).unwrap();
        let p = moment_strip_upper(&tenor, 0.5);
        assert!(p > 1.0 + 2.0 * tenor.eta);
        // just inside the strip the exponent is finite, just outside the branch fails
        assert!(ats_log_chf(c(0.0, -(p - 1e-6)), &tenor, 0.5).is_ok());
        assert!(ats_log_chf(c(0.0, -(p + 1e-6)), &tenor, 0.5).is_err());
    }
}
