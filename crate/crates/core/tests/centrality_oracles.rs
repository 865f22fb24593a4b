mod support;

use centrograph::centrality::{
    betweenness_centrality, closeness_centrality, degree_centrality, load_centrality, pagerank,
};
use centrograph::{CentralityWeights, Graph, Measure};
use support::{max_abs_diff, Dense, KARATE};

const TOL: f64 = 1e-9;

fn check_all(n: usize, edges: &[(usize, usize)]) {
    let g = Graph::from_edges(n, edges);
    let d = Dense::new(n, edges);
    let cases = [
        ("degree", degree_centrality(&g).unwrap().scores, d.degree_centrality()),
        ("bc", betweenness_centrality(&g).scores, d.betweenness()),
        ("load", load_centrality(&g).scores, d.load()),
        ("clos", closeness_centrality(&g).scores, d.closeness()),
        ("pr", pagerank(&g, 0.85, 1e-10, 200).unwrap().scores, d.pagerank(0.85)),
    ];
    for (name, got, want) in cases {
        let diff = max_abs_diff(&got, &want);
        assert!(diff < TOL, "{name} on {edges:?}: diff {diff}");
    }
}

#[test]
fn karate_matches_oracles() {
    check_all(34, &KARATE);
}

#[test]
fn karate_known_values() {
    let g = Graph::from_edges(34, &KARATE);
    let bc = betweenness_centrality(&g).scores;
    // Node 0 carries the largest share of shortest paths.
    let top = (0..34).max_by(|&a, &b| bc[a].total_cmp(&bc[b])).unwrap();
    assert_eq!(top, 0);
    assert!((bc[0] - 0.437_635_281_385_281_4).abs() < 1e-12, "{}", bc[0]);
    let pr = pagerank(&g, 0.85, 1e-10, 200).unwrap().scores;
    assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn random_small_graphs_match_oracles() {
    let mut rng = support::rng(2024);
    for i in 0..240 {
        let n = 3 + i % 6;
        let extra = [0.0, 0.2, 0.5, 0.9][i % 4];
        let edges = support::random_connected(&mut rng, n, extra);
        check_all(n, &edges);
    }
}

#[test]
fn disconnected_graphs_match_oracles() {
    let mut rng = support::rng(7);
    for n in 4..=8 {
        let mut a = support::random_connected(&mut rng, n / 2, 0.3);
        let b = support::random_connected(&mut rng, n - n / 2, 0.3);
        a.extend(b.iter().map(|&(x, y)| (x + n / 2, y + n / 2)));
        check_all(n, &a);
    }
}

#[test]
fn load_equals_betweenness_on_trees() {
    let mut rng = support::rng(11);
    for n in 3..40 {
        let g = Graph::from_edges(n, &support::random_tree(&mut rng, n));
        let diff = max_abs_diff(&load_centrality(&g).scores, &betweenness_centrality(&g).scores);
        assert!(diff < 1e-12, "n={n}: {diff}");
    }
}

#[test]
fn vertex_transitive_graphs_are_flat() {
    let graphs = [
        (7, support::cycle(7)),
        (6, support::complete(6)),
        (8, support::hypercube(3)),
        (10, support::petersen()),
    ];
    for (n, edges) in graphs {
        let g = Graph::from_edges(n, &edges);
        for m in Measure::ALL {
            let s = CentralityWeights::compute(&g, m).unwrap().scores;
            let spread = s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-12, "{m} on n={n}: spread {spread}");
        }
    }
}

#[test]
fn hand_values() {
    // Path 0-1-2: the middle node lies on the only path between the ends.
    let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]);
    assert_eq!(betweenness_centrality(&p3).scores, vec![0.0, 1.0, 0.0]);
    assert_eq!(load_centrality(&p3).scores, vec![0.0, 1.0, 0.0]);
    // Two disjoint edges: each node reaches one node at distance 1.
    let two = Graph::from_edges(4, &[(0, 1), (2, 3)]);
    for c in closeness_centrality(&two).scores {
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
    }
    // Star centre: every leaf pair routes through it.
    let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    assert_eq!(betweenness_centrality(&star).scores[0], 1.0);
    let d = Dense::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    let diff = max_abs_diff(&pagerank(&star, 0.85, 1e-10, 200).unwrap().scores, &d.pagerank(0.85));
    assert!(diff < TOL);
}

#[test]
fn isolated_node_pagerank_spreads_mass() {
    let edges = [(0, 1), (1, 2)];
    let g = Graph::from_edges(4, &edges);
    let d = Dense::new(4, &edges);
    let got = pagerank(&g, 0.85, 1e-10, 200).unwrap().scores;
    assert!(max_abs_diff(&got, &d.pagerank(0.85)) < TOL);
    assert_eq!(closeness_centrality(&g).scores[3], 0.0);
}
