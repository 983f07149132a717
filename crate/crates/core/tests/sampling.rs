use atslab::model::{ats_log_chf, TenorParams};
use atslab::par::Execution;
use atslab::pricing::{price_strikes, PricingGrid};
use atslab::sampling::{
    empirical_chf, ks_two_sample, mc_price_strikes, sample_ats_marginal, sample_tss_marginal, RngSpec,
};
use atslab::subordination::{Curve, TssSpec};
use num_complex::Complex64;

fn spec(alpha: f64) -> TssSpec {
    TssSpec::new(alpha, Curve::constant(0.2), Curve::power(1.0, 1.0)).unwrap()
}

#[test]
fn ks_accepts_same_law_and_separates_nig_from_vg() {
    let n = 100_000;
    let a = sample_tss_marginal(1.0, &spec(0.5), n, &mut RngSpec::new(1, 0).generator()).unwrap();
    let b = sample_tss_marginal(1.0, &spec(0.5), n, &mut RngSpec::new(1, 1).generator()).unwrap();
    let vg = sample_tss_marginal(1.0, &spec(0.0), n, &mut RngSpec::new(1, 2).generator()).unwrap();
    let same = ks_two_sample(&a, &b).unwrap();
    assert!(same.p_value > 1e-3, "same law rejected: {same:?}");
    let diff = ks_two_sample(&a, &vg).unwrap();
    assert!(diff.p_value < 1e-6, "NIG and VG not separated: {diff:?}");
}

#[test]
fn subordinator_moments() {
    let n = 200_000;
    for alpha in [0.0, 0.5] {
        let t = 0.5;
        let x = sample_tss_marginal(t, &spec(alpha), n, &mut RngSpec::new(9, 0).generator()).unwrap();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let (m, v) = (0.04 * t, 0.04f64.powi(2) * t * t);
        assert!(
            (mean - m).abs() < 5.0 * (v / n as f64).sqrt(),
            "alpha {alpha}: mean {mean} vs {m}"
        );
        assert!((var / v - 1.0).abs() < 0.05, "alpha {alpha}: var {var} vs {v}");
    }
}

#[test]
fn empirical_chf_matches_model() {
    let n = 200_000;
    let bound = 5.0 / (n as f64).sqrt();
    for alpha in [0.0, 0.5] {
        let tenor = TenorParams::new(0.25, 0.2, 0.25, 1.0, alpha).unwrap();
        let x = sample_ats_marginal(&tenor, alpha, n, &mut RngSpec::new(5, 3).generator()).unwrap();
        for u in [-20.0, -5.0, -1.0, 0.5, 2.0, 8.0, 15.0] {
            let model = ats_log_chf(Complex64::new(u, 0.0), &tenor, alpha).unwrap().exp();
            let emp = empirical_chf(&x, u);
            assert!((emp - model).norm() < bound, "alpha {alpha} u {u}: {emp} vs {model}");
        }
        // martingale: E[exp(f_T)] = 1
        let m = x.iter().map(|v| v.exp()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.005, "alpha {alpha}: E exp f = {m}");
    }
}

#[test]
fn monte_carlo_brackets_fourier() {
    let strikes = [80.0, 95.0, 100.0, 105.0, 120.0];
    for alpha in [0.0, 0.5] {
        let tenor = TenorParams::new(1.0, 0.2, 1.0, 0.5, alpha).unwrap();
        let exact = price_strikes(&tenor, alpha, 100.0, 0.98, &strikes, &PricingGrid::default()).unwrap();
        let mc = mc_price_strikes(
            &tenor,
            alpha,
            100.0,
            0.98,
            &strikes,
            400_000,
            RngSpec::new(11, 0),
            Execution::Parallel,
        )
        .unwrap();
        for (q, &(c, p)) in mc.iter().zip(&exact) {
            assert!(
                ((q.call.price - c) / q.call.std_error).abs() < 4.0,
                "alpha {alpha} K {}: call",
                q.strike
            );
            assert!(
                ((q.put.price - p) / q.put.std_error).abs() < 4.0,
                "alpha {alpha} K {}: put",
                q.strike
            );
        }
    }
}

#[test]
fn monte_carlo_independent_of_execution() {
    let tenor = TenorParams::new(0.5, 0.2, 0.5, 0.7, 0.5).unwrap();
    let run = |exec| {
        mc_price_strikes(
            &tenor,
            0.5,
            100.0,
            1.0,
            &[90.0, 100.0, 110.0],
            100_003,
            RngSpec::new(3, 7),
            exec,
        )
        .unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    let other = mc_price_strikes(
        &tenor,
        0.5,
        100.0,
        1.0,
        &[90.0, 100.0, 110.0],
        100_003,
        RngSpec::new(3, 8),
        Execution::Sequential,
    )
    .unwrap();
    assert_ne!(run(Execution::Sequential), other);
}
