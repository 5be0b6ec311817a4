use critforest::analysis::ks_distance;
use critforest::diffusion::*;
use critforest::drift::{AlphaTable, DriftEvalConfig};
use critforest::rng::child_stream;
use std::sync::OnceLock;

fn field() -> &'static DriftField {
    static F: OnceLock<DriftField> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = DriftEvalConfig::default();
        DriftField::new(Some(AlphaTable::cached_default(None, &cfg).unwrap()), cfg)
    })
}

#[test]
fn drift_sits_below_the_free_drift_and_falls_in_z() {
    for lambda in [-1.0, 0.0, 1.5] {
        for t in [0.0, 0.7, 2.0] {
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let z = 0.1 * i as f64;
                let d = field().eval(t, z, lambda).unwrap();
                assert!(d <= lambda - t + 1e-12);
                assert!(d < prev || i == 0, "t={t} z={z} lambda={lambda}");
                prev = d;
            }
        }
    }
}

#[test]
fn z_stays_below_b_and_tracks_it_at_first() {
    for i in 0..50 {
        let (z, b) = coupled_zb(field(), 0.0, 2.0, 1e-3, &mut child_stream(61, i)).unwrap();
        assert!(z.values.iter().zip(&b.values).all(|(a, c)| *a <= *c + 1e-12));
        assert!(z.values.iter().all(|&v| v >= 0.0));
    }
    for i in 0..100 {
        let (z, b) = coupled_zb(field(), 0.0, 0.01, 1e-4, &mut child_stream(62, i)).unwrap();
        let gap = z.values.iter().zip(&b.values).map(|(a, c)| c - a).fold(0.0, f64::max);
        assert!(gap <= 0.05, "replica {i}: gap {gap}");
    }
}

/// Time at zero counts grid points, so it depends on `dt` through `μ√dt`.
#[test]
fn strongly_subcritical_paths_hug_zero() {
    for i in 0..100 {
        let (z, b) = coupled_zb(field(), -10.0, 5.0, 0.01, &mut child_stream(63, i)).unwrap();
        assert!(z.time_at_zero() > 0.5, "replica {i}: {}", z.time_at_zero());
        assert!(z.time_at_zero() >= b.time_at_zero());
    }
}

#[test]
fn excursions_partition_part_of_the_horizon() {
    let t_max = 4.0;
    let mut seen = 0;
    for i in 0..30 {
        let b = simulate_b(0.0, t_max, 1e-3, &mut child_stream(64, i)).unwrap();
        let e = diffusion_excursions(&b, 0.0);
        seen += e.lengths.len();
        assert!(e.lengths.windows(2).all(|w| w[0] >= w[1]));
        assert!(e.intervals.windows(2).all(|w| w[0].1 <= w[1].0));
        assert!(e.intervals.iter().all(|&(a, c)| 0.0 <= a && a < c && c <= t_max + 1e-9));
        assert!(e.lengths.iter().sum::<f64>() <= t_max + 1e-9);
        let long = diffusion_excursions(&b, 0.1);
        assert!(long.lengths.iter().all(|&l| l >= 0.1 - 1e-9));
        assert_eq!(&long.lengths[..], &e.lengths[..long.lengths.len()]);
    }
    assert!(seen > 30);
}

/// `B(1)` at two step sizes: the discretisation shift is small next to the spread.
#[test]
fn halving_the_step_barely_moves_the_law() {
    let reps = 10_000u64;
    let end = |dt: f64, label: u64| -> Vec<f64> {
        (0..reps)
            .map(|i| *simulate_b(0.0, 1.0, dt, &mut child_stream(label, i)).unwrap().values.last().unwrap())
            .collect()
    };
    let coarse = end(1e-3, 65);
    let fine = end(2.5e-4, 66);
    let ks = ks_distance(&coarse, &fine).unwrap();
    assert!(ks <= 0.03, "KS {ks}");
}

#[test]
fn rejects_bad_grids() {
    let mut rng = child_stream(67, 0);
    assert!(simulate_b(0.0, 1.0, 0.0, &mut rng).is_err());
    assert!(simulate_b(0.0, -1.0, 0.01, &mut rng).is_err());
    assert!(simulate_z(field(), 0.0, 1.0, f64::NAN, &mut rng).is_err());
}

#[test]
fn critical_b_has_macroscopic_excursions() {
    let longest: Vec<f64> = (0..1000)
        .map(|i| {
            let b = simulate_b(0.0, 10.0, 0.01, &mut child_stream(68, i)).unwrap();
            diffusion_excursions(&b, 0.02).lengths.first().copied().unwrap_or(0.0)
        })
        .collect();
    let mean = longest.iter().sum::<f64>() / longest.len() as f64;
    assert!(mean > 0.1 && mean < 10.0, "mean {mean}");
}
