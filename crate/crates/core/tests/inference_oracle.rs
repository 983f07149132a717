use atslab::calibration::ThetaPoint;
use atslab::inference::{aggregate_days, fit_power_law, DayResult, Weighting};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn points(thetas: &[f64], etas: &[f64], vars: &[f64]) -> Vec<ThetaPoint> {
    thetas
        .iter()
        .zip(etas)
        .zip(vars)
        .map(|((&theta, &eta_hat), &var_log_eta)| ThetaPoint {
            maturity: theta / 0.04,
            theta,
            k_hat: 0.04,
            eta_hat,
            var_log_eta,
        })
        .collect()
}

/// Textbook weighted least squares through the normal equations.
struct Oracle {
    delta: f64,
    log_eta: f64,
    se_delta: f64,
    se_log_eta: f64,
    p_value: f64,
}

fn oracle(pts: &[ThetaPoint], w: &[f64]) -> Oracle {
    let n = pts.len();
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { pts[i].theta.ln() });
    let y = DVector::from_iterator(n, pts.iter().map(|p| p.eta_hat.ln()));
    let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let xtwx = x.transpose() * &wm * &x;
    let inv = xtwx.try_inverse().expect("regular design");
    let beta = &inv * x.transpose() * &wm * &y;
    let r = &y - &x * &beta;
    let s2 = (r.transpose() * &wm * &r)[(0, 0)] / (n as f64 - 2.0);
    let cov = inv * s2;
    let se_delta = cov[(1, 1)].sqrt();
    let t = beta[1] / se_delta;
    let dist = StudentsT::new(0.0, 1.0, n as f64 - 2.0).unwrap();
    Oracle {
        delta: beta[1],
        log_eta: beta[0],
        se_delta,
        se_log_eta: cov[(0, 0)].sqrt(),
        p_value: 2.0 * (1.0 - dist.cdf(t.abs())),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (4usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(1e-4f64..0.2, n),
            prop::collection::vec(0.05f64..5.0, n),
            prop::collection::vec(1e-6f64..0.5, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weighted_fit_matches_normal_equations((thetas, etas, vars) in instance()) {
        let pts = points(&thetas, &etas, &vars);
        let x: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
        let spread = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        for weighting in [Weighting::InverseVariance, Weighting::Equal] {
            let r = fit_power_law(&pts, weighting).unwrap();
            let o = oracle(&pts, &r.weights);
            prop_assert!(close(r.delta_hat, o.delta, 1e-10), "{} vs {}", r.delta_hat, o.delta);
            prop_assert!(close(r.log_eta_hat, o.log_eta, 1e-10));
            prop_assert!(close(r.se_delta, o.se_delta, 1e-10));
            prop_assert!(close(r.se_log_eta, o.se_log_eta, 1e-10));
            prop_assert!((r.p_value - o.p_value).abs() <= 1e-10, "{} vs {}", r.p_value, o.p_value);
        }
        // raw inverse-variance weights, before normalization, give the same line
        let raw: Vec<f64> = vars.iter().map(|v| 1.0 / v).collect();
        let r = fit_power_law(&pts, Weighting::InverseVariance).unwrap();
        let o = oracle(&pts, &raw);
        prop_assert!(close(r.delta_hat, o.delta, 1e-10));
        prop_assert!(close(r.se_delta, o.se_delta, 1e-10));
    }

    #[test]
    fn theta_scaling_moves_only_the_intercept((thetas, etas, vars) in instance(), c in 0.01f64..100.0) {
        let base = fit_power_law(&points(&thetas, &etas, &vars), Weighting::InverseVariance).unwrap();
        let scaled: Vec<f64> = thetas.iter().map(|t| t * c).collect();
        let r = fit_power_law(&points(&scaled, &etas, &vars), Weighting::InverseVariance).unwrap();
        prop_assert!((r.delta_hat - base.delta_hat).abs() <= 1e-12 * (1.0 + base.delta_hat.abs()) * 10.0);
        prop_assert!((r.se_delta - base.se_delta).abs() <= 1e-12 * (1.0 + base.se_delta) * 10.0);
        prop_assert!((r.log_eta_hat - (base.log_eta_hat - base.delta_hat * c.ln())).abs() <= 1e-9);
    }

    #[test]
    fn common_weight_factor_changes_nothing((thetas, etas, vars) in instance(), c in 1e-3f64..1e3) {
        let base = fit_power_law(&points(&thetas, &etas, &vars), Weighting::InverseVariance).unwrap();
        let scaled: Vec<f64> = vars.iter().map(|v| v * c).collect();
        let r = fit_power_law(&points(&thetas, &etas, &scaled), Weighting::InverseVariance).unwrap();
        for (a, b) in [
            (r.delta_hat, base.delta_hat),
            (r.log_eta_hat, base.log_eta_hat),
            (r.se_delta, base.se_delta),
            (r.se_log_eta, base.se_log_eta),
            (r.t_stat, base.t_stat),
            (r.p_value, base.p_value),
        ] {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn exact_power_law_is_recovered() {
    let thetas: Vec<f64> = (1..=8).map(|i| 0.002 * i as f64 * i as f64).collect();
    let etas: Vec<f64> = thetas.iter().map(|t| 0.5 * t.powf(-0.5)).collect();
    let r = fit_power_law(&points(&thetas, &etas, &[0.01; 8]), Weighting::Equal).unwrap();
    assert!((r.delta_hat + 0.5).abs() < 1e-12);
    assert!((r.log_eta_hat - 0.5f64.ln()).abs() < 1e-12);
    assert!(r.p_value < 1e-10);
}

#[test]
fn flat_eta_gives_unit_p_value() {
    let thetas = [0.001, 0.004, 0.01, 0.04, 0.08];
    let r = fit_power_law(
        &points(&thetas, &[0.7; 5], &[0.02, 0.0, 0.5, 0.1, 0.3]),
        Weighting::InverseVariance,
    )
    .unwrap();
    assert_eq!(r.delta_hat, 0.0);
    assert_eq!(r.t_stat, 0.0);
    assert_eq!(r.p_value, 1.0);
}

#[test]
fn aggregation_arithmetic() {
    let day = |d: &str, p: f64| DayResult {
        day: d.into(),
        model: "NIG".into(),
        dataset: "spx".into(),
        p_value: p,
    };
    let r = aggregate_days(&[day("a", 1e-6), day("b", 1e-8), day("c", 1e-7)]).unwrap();
    let g = &r.groups[0];
    assert!((g.mean_p - 3.7e-7).abs() < 1e-20);
    assert_eq!(g.max_p, 1e-6);
    assert!(g.flagged.is_empty());
    assert!(g.mean_p <= g.max_p);
    let r = aggregate_days(&[day("a", 1e-6), day("b", 0.5)]).unwrap();
    assert_eq!(r.groups[0].flagged, ["b"]);
    assert!(aggregate_days(&[]).is_err());
}
