use critforest::analysis::weak_majorises;
use critforest::combinatorics::{acyclic_prob_exact, LogCountTable, ScalingParams};
use critforest::graph::{Forest, Graph, UnionFind};
use critforest::rng::root_stream;
use critforest::samplers::{
    almost_monotone_triple, rejection_acceptance_rate, sample_forest_nm, sample_forest_np, sample_forest_np_embedded, sample_gnp,
    sample_uniform_tree, sequential_cycle_bound, Strategy,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn table_2000() -> &'static LogCountTable {
    static T: OnceLock<LogCountTable> = OnceLock::new();
    T.get_or_init(|| LogCountTable::build(2000).unwrap())
}

fn sizes(g: &Graph) -> Vec<f64> {
    g.component_sizes().into_iter().map(|s| s as f64).collect()
}

#[test]
fn rejection_rate_tracks_acyclicity() {
    let n = 2000;
    let p = ScalingParams::from_lambda(n, 0.0).unwrap().p;
    let mut rng = root_stream(21);
    let rate = rejection_acceptance_rate(n, p, 4000, &mut rng);
    let exact = acyclic_prob_exact(table_2000(), n, p).unwrap();
    assert!((rate / exact - 1.0).abs() < 0.25, "rate {rate}, exact {exact}");
}

#[test]
fn critical_edge_count_concentrates() {
    let n = 2000;
    let p = ScalingParams::from_lambda(n, 0.0).unwrap().p;
    let centre = (n * n) as f64 * p / 2.0;
    let width = (n as f64).powf(0.6);
    let mut rng = root_stream(22);
    let reps = 500;
    let inside = (0..reps)
        .filter(|_| {
            let f = sample_forest_np(Some(table_2000()), n, p, &mut rng, Strategy::Exact).unwrap();
            (f.edge_count() as f64 - centre).abs() <= width
        })
        .count();
    assert!(inside as f64 >= 0.99 * reps as f64, "{inside}/{reps}");
}

#[test]
fn edge_cases() {
    let mut rng = root_stream(23);
    assert_eq!(sample_uniform_tree(1, &mut rng).unwrap().edge_count(), 0);
    assert_eq!(sample_uniform_tree(2, &mut rng).unwrap().edges(), &[(0, 1)]);
    assert!(sample_uniform_tree(0, &mut rng).is_err());

    let table = LogCountTable::build(30).unwrap();
    for strategy in [Strategy::Exact, Strategy::Rejection { max_attempts: 1_000_000 }] {
        let empty = sample_forest_nm(Some(&table), 30, 0, &mut rng, strategy).unwrap();
        assert_eq!(empty.component_sizes().len(), 30);
        let tree = sample_forest_nm(Some(&table), 12, 11, &mut rng, strategy).unwrap();
        assert_eq!(tree.component_sizes(), vec![12]);
        assert!(sample_forest_nm(Some(&table), 12, 12, &mut rng, strategy).is_err());
    }

    assert_eq!(sample_gnp(40, 0.0, &mut rng).unwrap().edge_count(), 0);
    assert_eq!(sample_gnp(40, 1.0, &mut rng).unwrap().edge_count(), 40 * 39 / 2);
    assert!(sample_gnp(40, 1.5, &mut rng).is_err());
}

#[test]
fn cycle_bound_grows_with_k() {
    assert_eq!(sequential_cycle_bound(100.0, 0, 100).unwrap(), 0.0);
    let b: Vec<f64> = (1..20).map(|k| sequential_cycle_bound(100.0, k, 100).unwrap()).collect();
    assert!(b.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn ambient_graphs_majorise_forests() {
    let mut rng = root_stream(24);
    for _ in 0..20 {
        let e = sample_forest_np_embedded(500, 1.0 / 500.0, &mut rng, 1_000_000).unwrap();
        assert!(weak_majorises(&sizes(&e.ambient), &sizes(e.forest.graph())));
    }
    let mut monotone = 0;
    for _ in 0..20 {
        let t = almost_monotone_triple(None, 400, 200, &mut rng, 1_000_000).unwrap();
        if t.monotone {
            monotone += 1;
            assert!(weak_majorises(&sizes(t.upper.graph()), &sizes(t.middle.graph())));
            assert!(weak_majorises(&sizes(t.middle.graph()), &sizes(t.lower.graph())));
        }
    }
    assert!(monotone > 0);
}

#[test]
fn subcritical_cluster_mean() {
    let (n, reps) = (10_000, 2000);
    let p = 0.9 / n as f64;
    let mut rng = root_stream(25);
    let total: usize = (0..reps)
        .map(|_| {
            let g = sample_gnp(n, p, &mut rng).unwrap();
            let mut uf = UnionFind::new(n);
            for &(a, b) in &g.edges {
                uf.union(a, b);
            }
            uf.class_size(0)
        })
        .sum();
    let mean = total as f64 / reps as f64;
    assert!(mean <= 1.1 / (1.0 - n as f64 * p), "mean {mean}");
}

/// Acyclicity by depth-first search with parent tracking.
fn has_cycle(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a as usize].push((b as usize, i));
        adj[b as usize].push((a as usize, i));
    }
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, usize::MAX)];
        while let Some((v, via)) = stack.pop() {
            for &(w, e) in &adj[v] {
                if e == via {
                    continue;
                }
                if seen[w] {
                    return true;
                }
                seen[w] = true;
                stack.push((w, e));
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn validator_agrees_with_dfs(n in 1usize..12, raw in prop::collection::vec((0u32..12, 0u32..12), 0..14)) {
        let edges: Vec<(u32, u32)> = raw.into_iter().map(|(a, b)| (a % n as u32, b % n as u32)).collect();
        let well_formed = edges.iter().all(|&(a, b)| a < b);
        let ok = Forest::new(Graph { n_vertices: n, edges: edges.clone() }).is_ok();
        prop_assert_eq!(ok, well_formed && !has_cycle(n, &edges));
    }

    #[test]
    fn sampled_forests_validate(n in 1usize..40, frac in 0.0f64..1.0, seed in 0u64..1000) {
        let m = ((n - 1) as f64 * frac) as usize;
        let table = LogCountTable::build(40).unwrap();
        let f = sample_forest_nm(Some(&table), n, m, &mut root_stream(seed), Strategy::Exact).unwrap();
        prop_assert_eq!(f.edge_count(), m);
        prop_assert!(Forest::new(f.graph().clone()).is_ok());
    }
}
