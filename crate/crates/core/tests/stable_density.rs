use critforest::stable_density::*;
use proptest::prelude::*;
use std::f64::consts::PI;

/// `g` from its Fourier form, panel by panel with the double-exponential rule.
fn g_oracle(x: f64) -> f64 {
    let f = |t: f64| {
        let c = KAPPA * t * t.sqrt();
        (-c).exp() * (x * t + c).cos()
    };
    let mut acc = 0.0;
    let mut lo = 0.0;
    while lo < 24.0 {
        acc += quadrature::double_exponential::integrate(f, lo, lo + 0.25, 1e-14).integral;
        lo += 0.25;
    }
    acc / PI
}

#[test]
fn agrees_with_independent_quadrature() {
    let cfg = QuadratureConfig::default();
    for &x in &[-4.0, -1.5, 0.0, 0.5, 2.0, 6.0, 15.0] {
        let want = g_oracle(x);
        let got = eval_g(x, &cfg).unwrap();
        assert!((got - want).abs() < 1e-9, "x={x}: {got} vs {want}");
        assert!((shared_cache().g(x) - want).abs() < 1e-9, "cache at x={x}");
    }
    assert!((g_at_zero() - g_oracle(0.0)).abs() < 1e-10);
}

#[test]
fn integral_is_additive_and_normalised() {
    let cfg = QuadratureConfig::default();
    assert_eq!(integrate_g(1.3, 1.3, &cfg).unwrap(), 0.0);
    let whole = integrate_g(-6.0, 9.0, &cfg).unwrap();
    let parts = integrate_g(-6.0, 0.7, &cfg).unwrap() + integrate_g(0.7, 9.0, &cfg).unwrap();
    assert!((whole - parts).abs() < 1e-9);
    let total = integrate_g(-60.0, 60.0, &cfg).unwrap() + right_tail_mass(60.0);
    assert!((total - 1.0).abs() < 1e-6, "total {total}");
}

#[test]
fn tails() {
    let cfg = QuadratureConfig::default();
    // super-exponential on the left, a power law on the right
    assert!(eval_g(-50.0, &cfg).unwrap() < 1e-12);
    assert!(eval_g(500.0, &cfg).unwrap() < 1e-6);
    let r = eval_g(400.0, &cfg).unwrap() / right_tail_density(400.0);
    assert!((r - 1.0).abs() < 0.01, "ratio {r}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cached_density_is_positive(x in -28.0f64..39.0) {
        // g itself underflows f64 below about -17
        prop_assert!(shared_cache().ln_g(x).is_finite());
        if x > -15.0 {
            prop_assert!(shared_cache().g(x) > 0.0);
        }
    }

    #[test]
    fn direct_density_is_positive_and_bounded(x in -6.0f64..30.0) {
        let v = eval_g(x, &QuadratureConfig::default()).unwrap();
        prop_assert!(v > 0.0 && v < 0.5);
    }
}
