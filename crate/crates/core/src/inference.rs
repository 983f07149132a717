//! Weighted log-log regression of the calibrated skew parameter on
//! `theta`, the Student-t test of a zero slope and per-group aggregation of
//! daily p-values.
//!
//! With `x = ln theta` and `y = ln eta_hat`, the model is
//! `y = ln eta + delta x`; `delta = 0` means the skew parameter does not
//! scale with time.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use std::collections::BTreeMap;
use std::io::Write;

use crate::calibration::ThetaPoint;
use crate::error::{Error, Result};
use crate::market_data::fmt_sig12;

/// Significance threshold used to flag days that fail to reject `delta = 0`.
pub const FLAG_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `w_i = 1 / var(ln eta_hat_i)`.
    #[default]
    InverseVariance,
    Equal,
}

/// Result of the power-law fit `eta_hat = eta theta^delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub delta_hat: f64,
    pub log_eta_hat: f64,
    pub se_delta: f64,
    pub se_log_eta: f64,
    pub t_stat: f64,
    /// Two-sided p-value of `delta = 0` with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n_points: usize,
    pub r_squared_weighted: f64,
    pub weighting: Weighting,
    /// Normalized weights (mean one) in point order.
    pub weights: Vec<f64>,
    /// Weighted residual variance `sum w r^2 / (n - 2)`.
    pub residual_variance: f64,
    /// Weighted mean of `ln theta`.
    pub mean_ln_theta: f64,
    /// Weighted sum of squared deviations of `ln theta`.
    pub sxx: f64,
    pub sum_weights: f64,
}

fn weights(points: &[ThetaPoint], weighting: Weighting) -> Vec<f64> {
    let n = points.len();
    if weighting == Weighting::Equal {
        return vec![1.0; n];
    }
    let raw: Vec<Option<f64>> = points
        .iter()
        .map(|p| (p.var_log_eta > 0.0 && p.var_log_eta.is_finite()).then(|| 1.0 / p.var_log_eta))
        .collect();
    let max = raw.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0; n];
    }
    let w: Vec<f64> = points
        .iter()
        .zip(&raw)
        .map(|(p, r)| match r {
            Some(w) => *w,
            // zero variance takes the largest finite weight; infinite variance carries none
            None if p.var_log_eta == 0.0 => max,
            None => 0.0,
        })
        .collect();
    let mean = w.iter().sum::<f64>() / n as f64;
    w.into_iter().map(|v| v / mean).collect()
}

/// Two-sided Student-t p-value of `|t|` with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(0.5 * df, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Weighted least squares of `ln eta_hat` on `ln theta`.
pub fn fit_power_law(points: &[ThetaPoint], weighting: Weighting) -> Result<ScalingReport> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 3 points, found {n}"
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.eta_hat > 0.0 && p.theta > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "power-law fit needs eta_hat > 0 and theta > 0, got eta_hat={} theta={}",
            p.eta_hat, p.theta
        )));
    }
    let w = weights(points, weighting);
    let x: Vec<f64> = points.iter().map(|p| p.theta.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.eta_hat.ln()).collect();
    let sum_w: f64 = w.iter().sum();
    let mean_x = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sum_w;
    let mean_y = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sum_w;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - mean_x).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - mean_x) * (y[i] - mean_y)).sum();
    let syy: f64 = w.iter().zip(&y).map(|(w, y)| w * (y - mean_y).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData(
            "theta values do not vary (with positive weight)".into(),
        ));
    }
    let df = (n - 2) as f64;
    let (slope, intercept, ssr) = if syy == 0.0 {
        (0.0, mean_y, 0.0)
    } else {
        let slope = sxy / sxx;
        let intercept = mean_y - slope * mean_x;
        let ssr: f64 = (0..n).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
        (slope, intercept, ssr)
    };
    let s2 = ssr / df;
    let se_delta = (s2 / sxx).sqrt();
    let se_log_eta = (s2 * (1.0 / sum_w + mean_x * mean_x / sxx)).sqrt();
    let t_stat = if slope == 0.0 {
        0.0
    } else if se_delta == 0.0 {
        slope.signum() * f64::INFINITY
    } else {
        slope / se_delta
    };
    let p_value = if t_stat == 0.0 {
        1.0
    } else {
        student_t_two_sided(t_stat, df)
    };
    let r_squared_weighted = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(ScalingReport {
        delta_hat: slope,
        log_eta_hat: intercept,
        se_delta,
        se_log_eta,
        t_stat,
        p_value,
        n_points: n,
        r_squared_weighted,
        weighting,
        weights: w,
        residual_variance: s2,
        mean_ln_theta: mean_x,
        sxx,
        sum_weights: sum_w,
    })
}

/// One row of the regression figure data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub ln_theta: f64,
    pub ln_eta_hat: f64,
    /// Two standard deviations of `ln eta_hat` from the calibration.
    pub point_half_width: f64,
    pub fitted_ln_eta: f64,
    /// Two standard errors of the fitted line at `ln_theta`.
    pub line_half_width: f64,
}

impl ScalingReport {
    /// Fitted `ln eta_hat` at `ln theta = x`.
    pub fn fitted(&self, x: f64) -> f64 {
        self.log_eta_hat + self.delta_hat * x
    }

    /// Standard error of the fitted line at `ln theta = x`.
    pub fn line_se(&self, x: f64) -> f64 {
        (self.residual_variance * (1.0 / self.sum_weights + (x - self.mean_ln_theta).powi(2) / self.sxx)).sqrt()
    }

    /// Points with two-standard-deviation bands on `ln eta_hat`.
    pub fn regression_rows(&self, points: &[ThetaPoint]) -> Vec<RegressionRow> {
        points
            .iter()
            .map(|p| {
                let x = p.theta.ln();
                RegressionRow {
                    maturity: p.maturity,
                    ln_theta: x,
                    ln_eta_hat: p.eta_hat.ln(),
                    point_half_width: 2.0 * p.var_log_eta.sqrt(),
                    fitted_ln_eta: self.fitted(x),
                    line_half_width: 2.0 * self.line_se(x),
                }
            })
            .collect()
    }
}

/// Writes regression rows as CSV.
pub fn write_regression_csv<W: Write>(mut w: W, rows: &[RegressionRow]) -> Result<()> {
    writeln!(
        w,
        "T,ln_theta,ln_eta_hat,point_half_width_2sd,fitted_ln_eta,line_half_width_2se"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_sig12(r.maturity),
            fmt_sig12(r.ln_theta),
            fmt_sig12(r.ln_eta_hat),
            fmt_sig12(r.point_half_width),
            fmt_sig12(r.fitted_ln_eta),
            fmt_sig12(r.line_half_width)
        )?;
    }
    Ok(())
}

/// p-value of one day's test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub day: String,
    pub model: String,
    pub dataset: String,
    pub p_value: f64,
}

/// Summary of one `(model, dataset)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub model: String,
    pub dataset: String,
    pub p_values: Vec<(String, f64)>,
    pub mean_p: f64,
    pub max_p: f64,
    /// Days with `p >= FLAG_THRESHOLD`.
    pub flagged: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub threshold: f64,
    pub groups: Vec<GroupSummary>,
}

/// Mean and maximum p-value per `(model, dataset)`, groups sorted by key
/// and days kept in input order.
pub fn aggregate_days(results: &[DayResult]) -> Result<AggregateReport> {
    if results.is_empty() {
        return Err(Error::InsufficientData("no daily results to aggregate".into()));
    }
    let mut groups: BTreeMap<(String, String), Vec<(String, f64)>> = BTreeMap::new();
    for r in results {
        if !(0.0..=1.0).contains(&r.p_value) {
            return Err(Error::InvalidParameter(format!(
                "p-value {} of {} outside [0, 1]",
                r.p_value, r.day
            )));
        }
        groups
            .entry((r.model.clone(), r.dataset.clone()))
            .or_default()
            .push((r.day.clone(), r.p_value));
    }
    let groups = groups
        .into_iter()
        .map(|((model, dataset), p_values)| {
            let mean_p = p_values.iter().map(|p| p.1).sum::<f64>() / p_values.len() as f64;
            let max_p = p_values.iter().map(|p| p.1).fold(0.0, f64::max);
            let flagged = p_values
                .iter()
                .filter(|p| p.1 >= FLAG_THRESHOLD)
                .map(|p| p.0.clone())
                .collect();
            GroupSummary {
                model,
                dataset,
                p_values,
                mean_p,
                max_p,
                flagged,
            }
        })
        .collect();
    Ok(AggregateReport {
        threshold: FLAG_THRESHOLD,
        groups,
    })
}

/// Writes one CSV row per group.
pub fn write_aggregate_csv<W: Write>(mut w: W, report: &AggregateReport) -> Result<()> {
    writeln!(w, "model,dataset,n_days,mean_p,max_p,n_flagged")?;
    for g in &report.groups {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            g.model,
            g.dataset,
            g.p_values.len(),
            fmt_sig12(g.mean_p),
            fmt_sig12(g.max_p),
            g.flagged.len()
        )?;
    }
    Ok(())
}
