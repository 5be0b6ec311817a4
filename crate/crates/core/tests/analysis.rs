use critforest::analysis::*;
use critforest::combinatorics::ScalingParams;
use critforest::rng::{child_stream, root_stream};
use critforest::samplers::{forest_square_sum, sample_forest_np, Strategy};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn gaussian_samples_pass_ks() {
    let mut rng = root_stream(81);
    let a: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
    let crit = ks_permutation_critical(&a, &b, 0.99, 1000, &mut rng).unwrap();
    // Kolmogorov's asymptotic 1% point is 1.628 √(2/n) ≈ 0.0515
    assert!(crit < 0.061 && (crit - 0.0515).abs() < 0.006, "critical {crit}");
    assert!(ks_distance(&a, &b).unwrap() < crit);
    assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
    let shifted: Vec<f64> = a.iter().map(|x| x + 100.0).collect();
    assert_eq!(ks_distance(&a, &shifted).unwrap(), 1.0);
    assert!(ks_distance(&a, &[]).is_err());
}

#[test]
fn majorisation_examples() {
    assert!(weak_majorises(&[3.0, 2.0, 1.0], &[2.0, 2.0, 2.0]));
    assert!(!weak_majorises(&[1.0, 1.0], &[3.0, 0.0]));
}

#[test]
fn tail_after_refinement() {
    let x = [5.0, 5.0, 3.0];
    let mut y: Vec<f64> = vec![4.0, 1.0, 3.0, 2.0, 2.0, 1.0];
    y.sort_by(|a, b| b.total_cmp(a));
    let (eta, k) = (0.5, 2);
    let head: f64 = x[..k].iter().map(|v| v * v).sum();
    assert!(l2_tail(&y, 4) <= eta * head + l2_tail(&x, k));
    assert_eq!(l2_tail(&y, 4), 2.0);
    assert_eq!(l2_tail(&x, 3), 0.0);
    assert_eq!(l2_tail(&x, 0), 59.0);
}

#[test]
fn spectrum_summaries() {
    let same = SizeSample::new(vec![vec![1.0, 4.0, 2.0]; 25]).unwrap();
    let s = component_spectrum(&same, 4).unwrap();
    assert_eq!(s.len(), 4);
    for (r, want) in s.iter().zip([4.0, 2.0, 1.0, 0.0]) {
        assert_eq!(r.mean, want);
        assert_eq!(r.deciles[1], r.deciles[7]);
        assert_eq!(r.median, want);
    }
    assert!(component_spectrum(&same, 0).is_err());
    assert!(SizeSample::new(vec![vec![-1.0]]).is_err());
}

#[test]
fn rescaled_square_sum_stays_bounded() {
    let reps = 200u64;
    let means: Vec<f64> = [500usize, 2000, 8000]
        .iter()
        .map(|&n| {
            let p = ScalingParams::from_lambda(n, 0.0).unwrap().p;
            let vals: Vec<f64> = (0..reps)
                .map(|i| {
                    let f = sample_forest_np(None, n, p, &mut child_stream(82, i), Strategy::Rejection { max_attempts: 100_000 })
                        .unwrap();
                    forest_square_sum(&f) / (n as f64).powf(4.0 / 3.0)
                })
                .collect();
            Summary::of(&vals).mean
        })
        .collect();
    let (lo, hi) = means.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    assert!(hi <= 2.0 * lo, "{means:?}");
}

fn split(a: &[f64], cuts: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(cuts.iter().cycle())
        .flat_map(|(&x, &c)| [x * c, x * (1.0 - c)])
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn majorisation_is_a_preorder(
        a in prop::collection::vec(0.0f64..100.0, 1..20),
        c1 in prop::collection::vec(0.0f64..1.0, 1..5),
        c2 in prop::collection::vec(0.0f64..1.0, 1..5),
    ) {
        prop_assert!(weak_majorises(&a, &a));
        let b = split(&a, &c1);
        let c = split(&b, &c2);
        // refining a configuration can only lower prefix sums
        prop_assert!(weak_majorises(&a, &b));
        prop_assert!(weak_majorises(&b, &c));
        prop_assert!(weak_majorises(&a, &c));
    }

    #[test]
    fn ranks_are_ordered(reps in prop::collection::vec(prop::collection::vec(0.0f64..50.0, 0..8), 1..30)) {
        let s = component_spectrum(&SizeSample::new(reps).unwrap(), 3).unwrap();
        prop_assert!(s[0].mean >= s[1].mean && s[1].mean >= s[2].mean);
        prop_assert!(s.iter().all(|r| r.deciles.windows(2).all(|w| w[0] <= w[1])));
    }
}
