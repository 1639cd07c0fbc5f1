//! Rank the running-example call graph, pick the context block for
//! `sendMessage` and build the dummy method for it.
//!
//! ```bash
//! cargo run --example pagerank_running_example
//! ```

use std::path::Path;

use evsumm::callgraph::{pagerank, select_context_block, synthesize_dummy, CallGraph, PageRankConfig, TieRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/running_example/graph.json");
    let graph = CallGraph::load(&path)?;
    println!("{} nodes, {} edges", graph.node_count(), graph.edge_count());

    let ranks = pagerank(&graph, &PageRankConfig::default())?;
    println!("converged after {} iterations\n", ranks.iterations);
    println!("{:>4}  {:>4}  {:>8}  label", "node", "out", "rank");
    for node in graph.nodes() {
        println!(
            "{:>4}  {:>4}  {:>8.4}  {}",
            node.id,
            graph.out_degree(node.id)?,
            ranks.normalized[&node.id],
            node.label
        );
    }

    let target = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let block = select_context_block(&graph, &ranks, target, TieRule::LowestId, None, &mut rng)?
        .expect("sendMessage has a caller");
    let label = &graph.node(block).expect("known node").label;
    println!("\ncontext block for node {target}: node {block} ({label})");
    println!("dummy method: {}", synthesize_dummy(label)?.joined());
    Ok(())
}
