mod common;

use evsumm::callgraph::{pagerank, CallGraph, Node, NodeKind, PageRankConfig};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = CallGraph> {
    (2usize..12).prop_flat_map(|n| {
        prop::collection::vec((1..=n as u64, 1..=n as u64), 0..3 * n).prop_map(move |edges| {
            let nodes = (1..=n as u64)
                .map(|id| Node {
                    id,
                    label: format!("m{id}()"),
                    kind: NodeKind::Framework,
                    source_ref: None,
                })
                .collect();
            CallGraph::new(nodes, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn ranks_are_a_fixed_point(g in graph(), d in 0.5f64..0.95) {
        let cfg = PageRankConfig { damping: d, tolerance: 1e-12, max_iter: 10_000 };
        let r = pagerank(&g, &cfg).unwrap();
        let total: f64 = r.normalized.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for node in g.nodes() {
            let inflow: f64 = g
                .predecessors(node.id)
                .unwrap()
                .iter()
                .map(|&p| r.raw[&p] / g.out_degree(p).unwrap() as f64)
                .sum();
            let expected = (1.0 - d) + d * inflow;
            prop_assert!((r.raw[&node.id] - expected).abs() < 1e-9);
            prop_assert!(r.raw[&node.id] >= 1.0 - d - 1e-12);
        }
    }
}

#[test]
fn running_example_table() {
    let g = CallGraph::load(&common::data_dir().join("running_example/graph.json")).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (13, 12));
    let r = pagerank(&g, &PageRankConfig::default()).unwrap();
    let mut expected = vec![0.0545, 0.1009, 0.0717, 0.1155];
    expected.extend([0.0717; 4]);
    expected.extend([0.0742; 5]);
    for (id, want) in (1..=13u64).zip(expected) {
        assert!((r.get(id).unwrap() - want).abs() < 1e-3, "node {id}");
    }
}
