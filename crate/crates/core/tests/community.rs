mod common;

use common::{exhaustive_best_modularity, pairwise_modularity, two_cliques};
use proptest::prelude::*;
use talkgraph::community::{louvain_traced, modularity_of_edges, LouvainConfig};

fn run(n: usize, edges: &[(usize, usize, f64)]) -> talkgraph::community::LouvainRun {
    louvain_traced(n, edges.iter().copied(), LouvainConfig::default()).unwrap()
}

#[test]
fn modularity_fixtures() {
    let single = [(0, 1, 1.0)];
    assert!(modularity_of_edges(2, single, &[0, 0], 1.0).unwrap().abs() <= 1e-9);
    assert!((modularity_of_edges(2, single, &[0, 1], 1.0).unwrap() + 0.5).abs() <= 1e-9);
    let triangles = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)];
    let q = modularity_of_edges(6, triangles, &[0, 0, 0, 1, 1, 1], 1.0).unwrap();
    assert!((q - 0.5).abs() <= 1e-9);
    assert!((pairwise_modularity(6, &triangles, &[0, 0, 0, 1, 1, 1]) - 0.5).abs() <= 1e-12);
}

#[test]
fn planted_cliques_are_recovered() {
    let edges = two_cliques();
    let labels = run(8, &edges).assignment.labels;
    assert_eq!(labels, vec![0, 0, 0, 0, 1, 1, 1, 1]);
    for seed in 0..10 {
        let config = LouvainConfig { seed: Some(seed), ..LouvainConfig::default() };
        let labels = louvain_traced(8, edges.iter().copied(), config).unwrap().assignment.labels;
        assert!(labels[..4].iter().all(|&l| l == labels[0]));
        assert!(labels[4..].iter().all(|&l| l == labels[4]));
        assert_ne!(labels[0], labels[4]);
    }
}

fn small_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2usize..=8).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let count = pairs.len();
        (
            Just(n),
            prop::sample::subsequence(pairs, 1..=count),
            prop::collection::vec(0.1f64..2.0, count),
        )
            .prop_map(|(n, chosen, weights)| {
                let edges = chosen.into_iter().zip(weights).map(|((a, b), w)| (a, b, w)).collect();
                (n, edges)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn louvain_is_near_exhaustive_optimum((n, edges) in small_graph()) {
        let best = exhaustive_best_modularity(n, &edges);
        let found = run(n, &edges).assignment.modularity;
        prop_assert!(found >= best - 0.05, "louvain {found} vs optimum {best}");
        prop_assert!(found <= best + 1e-9);
    }

    #[test]
    fn reported_modularity_matches_recomputation((n, edges) in small_graph(), seed in prop::option::of(0u64..100)) {
        let r = louvain_traced(n, edges.iter().copied(), LouvainConfig { seed, ..LouvainConfig::default() }).unwrap();
        let labels = &r.assignment.labels;
        prop_assert_eq!(labels.len(), n);
        prop_assert!((r.assignment.modularity - pairwise_modularity(n, &edges, labels)).abs() <= 1e-9);
        // labels are dense 0..k
        let k = r.assignment.community_count();
        let mut seen = vec![false; k];
        for &l in labels { prop_assert!(l < k); seen[l] = true; }
        prop_assert!(seen.iter().all(|&s| s));
        // no worse than every node alone
        let singletons: Vec<usize> = (0..n).collect();
        prop_assert!(r.assignment.modularity >= pairwise_modularity(n, &edges, &singletons) - 1e-12);
        for w in r.pass_modularity.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "trace {:?}", r.pass_modularity);
        }
    }
}
