use critforest::drift::*;
use critforest::stable_density::{g_at_zero, shared_cache};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;
use std::f64::consts::PI;

fn cfg(weight: AlphaWeight) -> DriftEvalConfig {
    DriftEvalConfig { weight, ..Default::default() }
}

const WEIGHTS: [AlphaWeight; 2] = [AlphaWeight::Cubic, AlphaWeight::Plain];

#[derive(Deserialize)]
struct Fixture {
    weight: AlphaWeight,
    b: f64,
    lambda: f64,
    alpha_quadrature: f64,
    alpha_simpson: f64,
}

#[derive(Deserialize)]
struct Fixtures {
    schema_version: u32,
    points: Vec<Fixture>,
}

#[test]
fn reproduces_fixtures() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/alpha.json")).unwrap();
    let fx: Fixtures = serde_json::from_str(&text).unwrap();
    assert_eq!(fx.schema_version, 1);
    assert_eq!(fx.points.len(), 50);
    for p in &fx.points {
        let a = eval_alpha(p.b, p.lambda, &cfg(p.weight)).unwrap();
        assert!((a / p.alpha_quadrature - 1.0).abs() < 1e-9, "{:?} b={} l={}", p.weight, p.b, p.lambda);
        assert!((a / p.alpha_simpson - 1.0).abs() < 1e-8, "{:?} b={} l={}", p.weight, p.b, p.lambda);
    }
}

#[test]
fn small_b_limits() {
    for w in WEIGHTS {
        let c = cfg(w);
        let (g1, g3, g5) = gamma_limits(0.0, &c).unwrap();
        assert!((g5 / g3 - 1.0).abs() < 1e-14);
        // at λ = 0 both weights reduce to √(2π) g(0)
        assert!((g3 - (2.0 * PI).sqrt() * g_at_zero()).abs() < 1e-9);

        let bs = [0.2, 0.1, 0.05];
        let j1: Vec<f64> = bs.iter().map(|&b| eval_J(1, b, 0.0, &c).unwrap()).collect();
        assert!(j1[0] < j1[1] && j1[1] < j1[2] && j1[2] < g1, "{w:?}: {j1:?} vs {g1}");
        let d3: Vec<f64> = bs.iter().map(|&b| (b * eval_J(3, b, 0.0, &c).unwrap() - g3).abs()).collect();
        assert!(d3[0] > d3[1] && d3[1] > d3[2] && d3[2] < 0.05 * g3, "{w:?}: {d3:?}");
        let d5: Vec<f64> = bs.iter().map(|&b| (b.powi(3) * eval_J(5, b, 0.0, &c).unwrap() - g5).abs()).collect();
        assert!(d5[0] > d5[1] && d5[1] > d5[2], "{w:?}: {d5:?}");

        let limit = g1 * g5 / (g3 * g3);
        let slopes: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&b| (alpha_partial_b(b, 0.0, &c).unwrap() - limit).abs()).collect();
        assert!(slopes[2] < slopes[0] && slopes[2] < 0.05 * limit, "{w:?}: {slopes:?} vs {limit}");
    }
    for l in -3..=3 {
        assert!(gamma_limits(l as f64, &DriftEvalConfig::default()).unwrap().1 > 0.0);
    }
}

#[test]
fn j_decreases_in_b() {
    for w in WEIGHTS {
        for k in [1, 3, 5] {
            for l in [-2.0, 0.0, 2.0] {
                let vals: Vec<f64> = (1..=20).map(|i| eval_J(k, 0.25 * i as f64, l, &cfg(w)).unwrap()).collect();
                assert!(vals.windows(2).all(|v| v[1] < v[0]), "{w:?} k={k} l={l}");
            }
        }
    }
}

/// `α` as a ratio of expectations under the Lévy law `a = b² / ξ²`, whose
/// density is proportional to `a^{-3/2} e^{-b²/2a}`.
fn alpha_monte_carlo(weight: AlphaWeight, b: f64, lambda: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cubic = if weight == AlphaWeight::Cubic { 1.0 / 6.0 } else { 0.0 };
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let xi: f64 = StandardNormal.sample(&mut rng);
        let a = b * b / (xi * xi);
        let x = lambda - a;
        // g(-25) is below 1e-300, far past any contribution
        let w = if x < -25.0 { 0.0 } else { (shared_cache().ln_g(x) + cubic * x.powi(3)).exp() };
        let (num, den) = (a * w, w);
        sx += num;
        sy += den;
        sxx += num * num;
        syy += den * den;
        sxy += num * den;
    }
    let nf = n as f64;
    let (mx, my) = (sx / nf, sy / nf);
    let (vx, vy, cxy) = (sxx / nf - mx * mx, syy / nf - my * my, sxy / nf - mx * my);
    let r = mx / my;
    let var = (vx - 2.0 * r * cxy + r * r * vy) / (my * my * nf);
    (r, var.sqrt())
}

#[test]
fn monte_carlo_oracle() {
    for (i, w) in WEIGHTS.into_iter().enumerate() {
        let (mc, se) = alpha_monte_carlo(w, 1.0, 0.0, 400_000, 17 + i as u64);
        let q = eval_alpha(1.0, 0.0, &cfg(w)).unwrap();
        assert!((mc - q).abs() < 3.0 * se, "{w:?}: quadrature {q}, MC {mc} ± {se}");
    }
}

#[test]
fn derivative_identity_and_monotonicity() {
    let h = 1e-4;
    for w in WEIGHTS {
        let c = cfg(w);
        for b in [0.5, 1.0, 2.0] {
            for l in [-1.0, 0.0, 1.0] {
                let fd = (eval_alpha(b + h, l, &c).unwrap() - eval_alpha(b - h, l, &c).unwrap()) / (2.0 * h);
                let d = alpha_partial_b(b, l, &c).unwrap();
                assert!(d > 0.0);
                assert!((fd / d - 1.0).abs() < 1e-4, "{w:?} b={b} l={l}: {fd} vs {d}");
                let fdj = (eval_J(1, b + h, l, &c).unwrap() - eval_J(1, b - h, l, &c).unwrap()) / (2.0 * h);
                assert!((fdj / (-b * eval_J(3, b, l, &c).unwrap()) - 1.0).abs() < 1e-4);
            }
        }
        for l in [-2.0, 0.0, 2.0] {
            assert!(eval_alpha(0.001, l, &c).unwrap() < 0.01, "{w:?} l={l}");
        }
    }
}

#[test]
fn cubic_weight_gives_smaller_alpha() {
    // exp((λ-a)³/6) decreases in a, so it tilts the law of a downwards
    for b in [0.05, 0.5, 2.0] {
        for l in [-2.0, 0.0, 2.0] {
            let c = eval_alpha(b, l, &cfg(AlphaWeight::Cubic)).unwrap();
            let p = eval_alpha(b, l, &cfg(AlphaWeight::Plain)).unwrap();
            assert!(c < p, "b={b} l={l}: {c} vs {p}");
        }
    }
}

#[test]
fn interpolation_table_tracks_quadrature() {
    let c = DriftEvalConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let t = AlphaTable::build(
        Axis { lo: 0.0, step: 0.02, count: 151 },
        Axis { lo: -3.0, step: 0.05, count: 121 },
        &c,
    )
    .unwrap();
    assert!(t.max_deviation(7, &c).unwrap() < 1e-5);
    let path = dir.path().join("t.bin");
    t.save(&path).unwrap();
    assert_eq!(AlphaTable::load(&path).unwrap(), t);
}

fn lipschitz_constant() -> f64 {
    static C: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *C.get_or_init(|| {
        let c = DriftEvalConfig::default();
        let mut worst: f64 = 0.0;
        for i in 1..=50 {
            for j in 0..=8 {
                worst = worst.max(alpha_partial_b(0.1 * i as f64, -2.0 + 0.5 * j as f64, &c).unwrap().abs());
            }
        }
        worst
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lipschitz_in_b(b1 in 0.01f64..5.0, b2 in 0.01f64..5.0, l in -2.0f64..2.0) {
        let c = DriftEvalConfig::default();
        let d = (eval_alpha(b1, l, &c).unwrap() - eval_alpha(b2, l, &c).unwrap()).abs();
        // the grid maximum plus a margin for slopes between grid nodes
        prop_assert!(d <= 1.05 * lipschitz_constant() * (b1 - b2).abs() + 1e-12);
    }

    #[test]
    fn continuous_in_lambda(b in 0.05f64..5.0, l in -2.0f64..2.0) {
        let c = DriftEvalConfig::default();
        prop_assert!((eval_alpha(b, l, &c).unwrap() - eval_alpha(b, l + 1e-4, &c).unwrap()).abs() <= 1e-2);
    }
}
