//! Analytic check report for a parameter curve set and per-quote smile
//! comparison between free and constant-`eta` fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::calibration::{model_ivs, SurfaceFit};
use crate::error::{Error, Result};
use crate::market_data::{fmt_sig12, Surface, DEFAULT_MATURITIES};
use crate::model::CurveSpec;
use crate::pricing::PricingGrid;
use crate::subordination::{
    independence_gap, representability_verdict, tss_exponent_by_integral, tss_gamma_drift, tss_log_laplace,
    validate_tss, CoefficientPath, Curve, TssSpec, ValidationTolerance, Verdict, Violation,
};

/// Frequencies of the exponent check.
pub const LAB_U: [f64; 8] = [-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0];
/// Times of the exponent check.
pub const LAB_T: [f64; 4] = [0.05, 0.25, 1.0, 2.0];
/// Frequencies of the independence check, used for both arguments.
pub const GAP_U: [f64; 5] = [-2.0, -1.0, 0.5, 1.0, 2.0];

/// `n` log-spaced times in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `0 <= gamma <= t sigma^2` up to rounding of the bound; for small `t`
/// the drift equals the bound to within double precision.
pub fn gamma_within_bound(gamma: f64, t: f64, sigma: f64) -> bool {
    gamma >= 0.0 && gamma <= t * sigma * sigma * (1.0 + 4.0 * f64::EPSILON)
}

/// The TSS whose `sigma_t` and `k_t` follow the power-law curves.
pub fn tss_from_curves(curves: &CurveSpec, alpha: f64) -> Result<TssSpec> {
    TssSpec::new(
        alpha,
        Curve::power(curves.sigma_bar, curves.beta_sigma),
        Curve::power(curves.k_bar, curves.beta_k),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub s: f64,
    pub t: f64,
    pub u1: Complex64,
    pub u2: Complex64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub alpha: f64,
    pub curves: CurveSpec,
    pub tss_validation: Vec<Violation>,
    pub exponent_match_max_err: f64,
    pub gamma_bound_ok: bool,
    pub representability: Verdict,
    /// Gaps of `W(Z_t) - (1/2 + eta_t) Z_t`, zero everywhere iff `eta` is flat.
    pub independence_gaps: Vec<GapRow>,
}

/// Runs the analytic subordinator checks for `curves` at `alpha`; `eta_tol`
/// is the relative eta spread accepted as constant.
pub fn lab_report(curves: &CurveSpec, alpha: f64, eta_tol: f64) -> Result<LabReport> {
    let spec = tss_from_curves(curves, alpha)?;
    let t_grid = log_grid(1e-6, 2.0, 20);
    let tss_validation = validate_tss(&spec, &t_grid, ValidationTolerance::default());

    let mut exponent_match_max_err: f64 = 0.0;
    for &t in &LAB_T {
        for &u in &LAB_U {
            let quad = tss_exponent_by_integral(u, t, &spec)?;
            let closed = tss_log_laplace(Complex64::new(0.0, -u), t, &spec)?;
            exponent_match_max_err = exponent_match_max_err.max((quad - closed).norm());
        }
    }

    let mut gamma_bound_ok = true;
    for &t in &t_grid {
        let g = tss_gamma_drift(t, &spec)?;
        let s = spec.sigma.eval(t);
        gamma_bound_ok &= gamma_within_bound(g, t, s);
    }

    let model = curves.model(alpha, &DEFAULT_MATURITIES)?;
    let representability = representability_verdict(&model, eta_tol)?;

    let path = CoefficientPath {
        a: Curve::constant(1.0),
        b: Curve::tabulated(
            model.tenors.iter().map(|t| t.maturity).collect(),
            model.tenors.iter().map(|t| -(0.5 + t.eta)).collect(),
        )?,
        c: Curve::constant(0.0),
    };
    let (s, t) = (0.5, 1.0);
    let mut independence_gaps = Vec::with_capacity(GAP_U.len() * GAP_U.len());
    for &u1 in &GAP_U {
        for &u2 in &GAP_U {
            let (u1, u2) = (Complex64::new(u1, 0.0), Complex64::new(u2, 0.0));
            let gap = independence_gap(s, t, u1, u2, &path, &spec)?;
            independence_gaps.push(GapRow { s, t, u1, u2, gap });
        }
    }

    Ok(LabReport {
        alpha,
        curves: *curves,
        tss_validation,
        exponent_match_max_err,
        gamma_bound_ok,
        representability,
        independence_gaps,
    })
}

/// Market and model implied volatility at one strike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmileRow {
    #[serde(rename = "T")]
    pub maturity: f64,
    #[serde(rename = "K")]
    pub strike: f64,
    pub market_iv: f64,
    pub model_iv: f64,
    pub constant_eta_iv: f64,
}

/// Implied volatility MSE of both fits at one maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub mse_free: f64,
    pub mse_constant_eta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmileReport {
    pub rows: Vec<SmileRow>,
    pub mse: Vec<MseRow>,
}

fn same_maturity(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.max(1.0)
}

/// Per-quote comparison of a free fit and a constant-`eta` fit of `surface`.
pub fn smile_report(
    free: &SurfaceFit,
    constant: &SurfaceFit,
    surface: &Surface,
    grid: &PricingGrid,
) -> Result<SmileReport> {
    if surface.smiles.is_empty() {
        return Err(Error::InsufficientData("surface has no smiles".into()));
    }
    let n = surface.smiles.len();
    if free.tenors.len() != n || constant.tenors.len() != n {
        return Err(Error::Malformed(format!(
            "surface has {n} maturities but fits have {} and {}",
            free.tenors.len(),
            constant.tenors.len()
        )));
    }
    let mut rows = Vec::new();
    let mut mse = Vec::with_capacity(n);
    for ((smile, f), c) in surface.smiles.iter().zip(&free.tenors).zip(&constant.tenors) {
        let t = smile.maturity;
        if !same_maturity(t, f.params.maturity) || !same_maturity(t, c.params.maturity) {
            return Err(Error::MissingTenor(t));
        }
        let model = model_ivs(&f.params, free.alpha, smile, grid)?;
        let flat = model_ivs(&c.params, constant.alpha, smile, grid)?;
        let (mut e_free, mut e_flat) = (0.0, 0.0);
        for ((p, &m), &q) in smile.points.iter().zip(&model).zip(&flat) {
            e_free += (m - p.iv).powi(2);
            e_flat += (q - p.iv).powi(2);
            rows.push(SmileRow {
                maturity: t,
                strike: p.strike,
                market_iv: p.iv,
                model_iv: m,
                constant_eta_iv: q,
            });
        }
        let k = smile.points.len() as f64;
        let (mse_free, mse_constant_eta) = (e_free / k, e_flat / k);
        mse.push(MseRow {
            maturity: t,
            mse_free,
            mse_constant_eta,
            ratio: mse_constant_eta / mse_free,
        });
    }
    Ok(SmileReport { rows, mse })
}

/// Writes the per-quote rows as CSV.
pub fn write_smile_csv<W: Write>(mut w: W, report: &SmileReport) -> Result<()> {
    writeln!(w, "T,K,market_iv,model_iv,constant_eta_iv")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_sig12(r.maturity),
            fmt_sig12(r.strike),
            fmt_sig12(r.market_iv),
            fmt_sig12(r.model_iv),
            fmt_sig12(r.constant_eta_iv)
        )?;
    }
    Ok(())
}

/// Writes the per-maturity MSE rows as CSV.
pub fn write_mse_csv<W: Write>(mut w: W, report: &SmileReport) -> Result<()> {
    writeln!(w, "T,mse_free,mse_constant_eta,ratio")?;
    for r in &report.mse {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_sig12(r.maturity),
            fmt_sig12(r.mse_free),
            fmt_sig12(r.mse_constant_eta),
            fmt_sig12(r.ratio)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subordination::ETA_CONSTANCY_TOL;

    #[test]
    fn lab_on_default_curves() {
        let r = lab_report(&CurveSpec::default(), 0.5, ETA_CONSTANCY_TOL).unwrap();
        assert!(r.tss_validation.is_empty(), "{:?}", r.tss_validation);
        assert!(r.gamma_bound_ok);
        assert!(r.exponent_match_max_err <= 1e-6, "{}", r.exponent_match_max_err);
        assert!(!r.representability.is_representable());
        assert_eq!(r.independence_gaps.len(), 25);
        let max = r.independence_gaps.iter().map(|g| g.gap).fold(0.0, f64::max);
        assert!(max > 1e-6, "{max:e}");
    }

    #[test]
    fn lab_on_flat_eta() {
        let curves = CurveSpec {
            delta: 0.0,
            ..Default::default()
        };
        let r = lab_report(&curves, 0.0, ETA_CONSTANCY_TOL).unwrap();
        assert!(r.representability.is_representable());
        assert!(r.independence_gaps.iter().all(|g| g.gap <= 1e-12));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-6, 2.0, 20);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-6).abs() < 1e-20 && (g[19] - 2.0).abs() < 1e-14);
    }
}
