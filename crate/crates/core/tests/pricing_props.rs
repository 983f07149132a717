use atslab::model::TenorParams;
use atslab::pricing::{black_price, implied_vol, price_strikes, EuropeanOption, PricingGrid, QuadratureRule};
use proptest::prelude::*;

fn tenor() -> impl Strategy<Value = (f64, TenorParams)> {
    (
        prop_oneof![Just(0.0), Just(0.5), 0.05f64..0.95],
        0.02f64..2.0,
        0.08f64..0.5,
        0.05f64..1.5,
        0.1f64..3.0,
    )
        .prop_filter_map("valid tenor", |(alpha, t, sigma, k_scale, eta)| {
            TenorParams::new(t, sigma, k_scale * t, eta, alpha)
                .ok()
                .map(|p| (alpha, p))
        })
}

fn strikes(forward: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| forward * (0.7 + 0.6 * i as f64 / (n - 1) as f64))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_arbitrage_shape(((alpha, tenor), forward, discount) in (tenor(), 50.0f64..200.0, 0.8f64..1.0)) {
        let ks = strikes(forward, 25);
        let prices = price_strikes(&tenor, alpha, forward, discount, &ks, &PricingGrid::default()).unwrap();
        let scale = discount * forward;
        for (&k, &(c, p)) in ks.iter().zip(&prices) {
            prop_assert!(c >= (discount * (forward - k)).max(0.0) - 1e-12 * scale);
            prop_assert!(c <= scale * (1.0 + 1e-12));
            prop_assert!(p >= (discount * (k - forward)).max(0.0) - 1e-12 * scale);
            prop_assert!(p <= discount * k * (1.0 + 1e-12));
            prop_assert!((c - p - discount * (forward - k)).abs() <= 1e-10 * scale);
        }
        let tol = 1e-9 * scale;
        for w in prices.windows(2) {
            prop_assert!(w[1].0 <= w[0].0 + tol, "call not decreasing in K");
            prop_assert!(w[1].1 >= w[0].1 - tol, "put not increasing in K");
        }
        for w in prices.windows(3) {
            prop_assert!(w[0].0 - 2.0 * w[1].0 + w[2].0 >= -tol, "call not convex in K");
        }
    }

    #[test]
    fn implied_vol_round_trip(sigma in 0.03f64..1.5, t in 0.01f64..3.0, m in 0.6f64..1.6, is_call: bool, discount in 0.7f64..1.0) {
        let opt = EuropeanOption::new(100.0 * m, t, is_call, 100.0, discount).unwrap();
        let price = black_price(&opt, sigma);
        // far wings carry no volatility information at double precision
        prop_assume!(price - opt.intrinsic() > 1e-9 * opt.upper_bound());
        let iv = implied_vol(price, &opt).unwrap();
        prop_assert!((black_price(&opt, iv) - price).abs() <= 1e-10 * opt.upper_bound());
        prop_assert!((iv - sigma).abs() <= 1e-6 * sigma.max(1.0), "{iv} vs {sigma}");
    }
}

#[test]
fn quadrature_rules_agree() {
    let grid = PricingGrid::default();
    let kronrod = PricingGrid {
        rule: QuadratureRule::AdaptiveKronrod,
        ..grid
    };
    for alpha in [0.0, 0.5, 0.8] {
        for t in [0.02, 0.25, 2.0] {
            let tenor = TenorParams::new(t, 0.2, t, 0.5 * t.powf(-0.5), alpha).unwrap();
            let ks = strikes(100.0, 9);
            let a = price_strikes(&tenor, alpha, 100.0, 0.99, &ks, &grid).unwrap();
            let b = price_strikes(&tenor, alpha, 100.0, 0.99, &ks, &kronrod).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.0 - y.0).abs() < 1e-8, "alpha {alpha} T {t}: {} vs {}", x.0, y.0);
            }
        }
    }
}

#[test]
fn tiny_k_recovers_black() {
    for alpha in [0.0, 0.5] {
        let t = 0.5;
        let tenor = TenorParams::new(t, 0.25, 1e-8, 1.0, alpha).unwrap();
        let ks = strikes(100.0, 7);
        let prices = price_strikes(&tenor, alpha, 100.0, 1.0, &ks, &PricingGrid::default()).unwrap();
        for (&k, &(c, _)) in ks.iter().zip(&prices) {
            let opt = EuropeanOption::new(k, t, true, 100.0, 1.0).unwrap();
            let iv = implied_vol(c, &opt).unwrap();
            assert!((iv - 0.25).abs() < 1e-5, "alpha {alpha} K {k}: {iv}");
        }
    }
}
