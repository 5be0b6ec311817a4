use critforest::combinatorics::*;
use critforest::drift::{eval_alpha, AlphaWeight, DriftEvalConfig};
use critforest::oracle;
use critforest::stable_density::shared_cache;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn g(x: f64) -> f64 {
    shared_cache().g(x)
}

/// Forest counts by the size of the tree holding vertex 1, in exact integers.
fn bigint_forest_counts(n_max: usize) -> Vec<Vec<BigUint>> {
    let mut binom = vec![vec![BigUint::zero(); n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        binom[n][0] = BigUint::one();
        for k in 1..=n {
            binom[n][k] = &binom[n - 1][k - 1] + &binom[n - 1][k];
        }
    }
    let trees = |k: usize| if k <= 2 { BigUint::one() } else { BigUint::from(k).pow(k as u32 - 2) };
    let mut f = vec![vec![BigUint::zero(); n_max + 1]; n_max + 1];
    f[0][0] = BigUint::one();
    for n in 1..=n_max {
        for m in 0..n {
            let mut acc = BigUint::zero();
            for k in 1..=(m + 1).min(n) {
                let rest = m + 1 - k;
                if rest <= n - k {
                    acc += &binom[n - 1][k - 1] * trees(k) * &f[n - k][rest];
                }
            }
            f[n][m] = acc;
        }
    }
    f
}

#[test]
fn log_counts_match_exact_integers() {
    let exact = bigint_forest_counts(40);
    let table = LogCountTable::build(40).unwrap();
    for n in 1..=40 {
        for m in 0..n {
            let want = exact[n][m].to_f64().unwrap().ln();
            let got = forest_count_log(&table, n, m).unwrap();
            assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "n={n} m={m}: {got} vs {want}");
        }
    }
    // spanning trees
    assert_eq!(exact[10][9], BigUint::from(10u32).pow(8));
}

#[test]
fn small_counts_match_enumeration() {
    let table = LogCountTable::build(6).unwrap();
    for n in 1..=6 {
        for (m, c) in oracle::forest_counts(n).unwrap().iter().enumerate() {
            assert_eq!(forest_count_log(&table, n, m).unwrap().exp().round() as u64, *c);
        }
    }
}

#[test]
fn acyclic_asymptotic_scaling_and_accuracy() {
    let (n, lam) = (1000, 0.7);
    let small = acyclic_prob_asymptotic(n, ScalingParams::from_lambda(n, lam).unwrap().p, g).unwrap();
    let big = acyclic_prob_asymptotic(64 * n, ScalingParams::from_lambda(64 * n, lam).unwrap().p, g).unwrap();
    assert!((big / small - 0.5).abs() < 1e-12);

    let table = LogCountTable::build(2000).unwrap();
    let p = ScalingParams::from_lambda(2000, 0.0).unwrap().p;
    let ratio = acyclic_prob_exact(&table, 2000, p).unwrap() / acyclic_prob_asymptotic(2000, p, g).unwrap();
    assert!((ratio - 1.0).abs() < 0.10, "ratio {ratio}");
}

/// Away from `Λ = 0` the exact acyclicity probability carries an extra
/// `exp(-Λ³/6)` relative to `g(Λ) e^{3/4} √(2π) N^{-1/6}`.
#[test]
fn acyclic_asymptotic_cubic_correction() {
    let n = 200_000;
    for lam in [-2.0, 2.0] {
        let p = ScalingParams::from_lambda(n, lam).unwrap().p;
        let exact = AcyclicProfile::build(n, p).unwrap().ln_acyclic(n);
        let plain = acyclic_prob_asymptotic(n, p, g).unwrap().ln();
        let corrected = plain - lam * lam * lam / 6.0;
        assert!((exact - corrected).abs() < 0.15, "lam={lam}: {exact} vs {corrected}");
        assert!((exact - plain).abs() > 1.0, "lam={lam}");
    }
}

#[test]
fn stack_events_sum_to_separation_probability() {
    let table = LogCountTable::build(5).unwrap();
    for &p in &[0.1, 0.3, 0.5] {
        for r in 1..=5 {
            let sum: f64 = (r..=5).map(|k| stack_forest_event_prob(&table, 5, r, k, p).unwrap()).sum();
            let sep = oracle::separated_prob(5, r, p).unwrap();
            assert!((sum - sep).abs() < 1e-12, "p={p} r={r}: {sum} vs {sep}");
        }
    }
    assert!(stack_forest_event_prob(&table, 5, 3, 2, 0.3).is_err());
}

#[test]
fn stack_asymptotic_near_exact_at_unit_scale() {
    let n = 3000;
    let table = LogCountTable::build(n).unwrap();
    let p = ScalingParams::from_lambda(n, 0.0).unwrap().p;
    let r = (n as f64).cbrt().floor() as usize;
    let k = (n as f64).powf(2.0 / 3.0).floor() as usize;
    let ratio = stack_forest_event_prob(&table, n, r, k, p).unwrap() / stack_forest_asymptotic(n, n, r, k, p, g).unwrap();
    // the closed form omits exp(-(Λ-s-a)³/6) from the acyclicity of the
    // unexplored graph, which is exp(a³/6) here
    let (a, _, _) = ScalingParams::new(n, p).unwrap().stack_coords(n, r, k).unwrap();
    let missing = (a * a * a / 6.0).exp();
    assert!((ratio / missing - 1.0).abs() < 0.2, "ratio {ratio}, missing factor {missing}");
    assert!(missing > 1.1);
    assert!(stack_forest_asymptotic(n, n, r, 0, p, g).is_err());
}

#[test]
fn expected_stack_forest_size() {
    let table = LogCountTable::build(2000).unwrap();
    assert_eq!(expected_stack_forest_exact(&table, 7, 7, 0.2).unwrap(), 7.0);
    let want = oracle::expected_root_tree_size(5, 0.3).unwrap();
    assert!((expected_stack_forest_exact(&table, 5, 1, 0.3).unwrap() - want).abs() < 1e-12);

    // the exact law converges to α with the plain weight
    let cfg = DriftEvalConfig { weight: AlphaWeight::Plain, ..Default::default() };
    let gaps: Vec<f64> = [500usize, 1000, 2000]
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let p = ScalingParams::from_lambda(n, 0.0).unwrap().p;
            let r = nf.cbrt().floor() as usize;
            // compare at the realised b = r N^{-1/3}
            let a = eval_alpha(r as f64 / nf.cbrt(), 0.0, &cfg).unwrap();
            (expected_stack_forest_exact(&table, n, r, p).unwrap() / nf.powf(2.0 / 3.0) - a).abs()
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");
    assert!(gaps[2] < 0.05, "gaps {gaps:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn acyclicity_decreases_in_p(n in 2usize..60, p in 0.001f64..0.9, dp in 0.001f64..0.09) {
        let table = LogCountTable::build(60).unwrap();
        let lo = ln_acyclic_exact(&table, n, p).unwrap();
        let hi = ln_acyclic_exact(&table, n, p + dp).unwrap();
        prop_assert!(hi <= lo + 1e-12);
        prop_assert!(lo <= 1e-12 && hi.is_finite());
    }

    #[test]
    fn stack_events_are_subprobabilities(n in 2usize..50, r in 1usize..50, p in 0.001f64..0.5) {
        let r = r.min(n);
        let table = LogCountTable::build(50).unwrap();
        let sum: f64 = (r..=n).map(|k| stack_forest_event_prob(&table, n, r, k, p).unwrap()).sum();
        prop_assert!(sum > 0.0 && sum <= 1.0 + 1e-9);
    }
}
