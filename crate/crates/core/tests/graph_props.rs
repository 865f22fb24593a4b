mod support;

use std::fmt::Write as _;

use centrograph::{load_edge_list, Error, Graph};
use proptest::prelude::*;
use support::Dense;

fn edge_file(edges: &[(usize, usize)]) -> String {
    let mut s = String::from("# generated\n");
    for (a, b) in edges {
        writeln!(s, "n{a}\tn{b}").unwrap();
    }
    s
}

proptest! {
    #[test]
    fn reversed_duplicates_do_not_change_graph(edges in proptest::collection::vec((0usize..10, 0usize..10), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.cites");
        let b = dir.path().join("b.cites");
        std::fs::write(&a, edge_file(&edges)).unwrap();
        let doubled: Vec<(usize, usize)> = edges.iter().copied().chain(edges.iter().map(|&(x, y)| (y, x))).collect();
        std::fs::write(&b, edge_file(&doubled)).unwrap();
        let (ga, _) = load_edge_list(&a, None).unwrap();
        let (gb, _) = load_edge_list(&b, None).unwrap();
        prop_assert_eq!(&ga, &gb);
        prop_assert_eq!(ga.raw_edge_count(), edges.len());
        prop_assert_eq!(gb.raw_edge_count(), 2 * edges.len());
    }

    #[test]
    fn degrees_sum_to_twice_edges(edges in proptest::collection::vec((0usize..12, 0usize..12), 0..50)) {
        let g = Graph::from_edges(12, &edges);
        let total: usize = (0..12).map(|v| g.degree(v)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
        for v in 0..12 {
            prop_assert!(!g.adj(v).contains(&v));
            prop_assert!(g.adj(v).windows(2).all(|w| w[0] < w[1]));
            for &u in g.adj(v) {
                prop_assert!(g.has_edge(u, v));
            }
        }
        let again: Vec<(usize, usize)> = (0..12).flat_map(|v| g.adj(v).iter().map(move |&u| (v, u))).collect();
        prop_assert_eq!(Graph::from_edges(12, &again), g);
    }

    #[test]
    fn distance_two_matches_floyd_warshall(edges in proptest::collection::vec((0usize..9, 0usize..9), 0..25)) {
        let g = Graph::from_edges(9, &edges);
        let d = Dense::new(9, &edges);
        for v in 0..9 {
            prop_assert_eq!(g.nodes_at_distance_two(v).unwrap(), &d.at_distance_two(v)[..]);
        }
    }
}

#[test]
fn karate_distance_two_of_node_zero() {
    let g = Graph::from_edges(34, &support::KARATE);
    let d = Dense::new(34, &support::KARATE);
    assert_eq!(g.nodes_at_distance_two(0).unwrap(), &d.at_distance_two(0)[..]);
    assert_eq!(g.edge_count(), 78);
    let k4 = Graph::from_edges(4, &support::complete(4));
    assert!((0..4).all(|v| g.nodes_at_distance_two(v).is_ok() && k4.nodes_at_distance_two(v).unwrap().is_empty()));
    assert!(matches!(g.nodes_at_distance_two(34), Err(Error::NodeOutOfRange { .. })));
}

#[test]
fn labels_and_isolated_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.cites");
    let labels = dir.path().join("g.content");
    std::fs::write(&edges, "10\t20\n20\t30\n30\t30\n").unwrap();
    std::fs::write(&labels, "10 0 1 0 Alpha\n20 1 0 0 Beta\n40 0 0 1 Alpha\n").unwrap();
    let (g, l) = load_edge_list(&edges, Some(&labels)).unwrap();
    assert_eq!(g.node_count(), 4);
    assert_eq!(g.edge_count(), 2);
    // The self-loop line is read but dropped.
    assert_eq!(g.raw_edge_count(), 3);
    let v40 = g.index_of("40").unwrap();
    assert_eq!(g.degree(v40), 0);
    assert_eq!(l.class_count(), 2);
    assert_eq!(l.label(g.index_of("30").unwrap()), None);
    assert_eq!(l.label(v40), l.label(g.index_of("10").unwrap()));
    assert_eq!(l.labeled_count(), 3);
}

#[test]
fn malformed_lines_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("bad.cites");
    std::fs::write(&edges, "1 2\n\n3 4 5\n").unwrap();
    match load_edge_list(&edges, None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        load_edge_list(&dir.path().join("missing"), None),
        Err(Error::Io { .. })
    ));
}
