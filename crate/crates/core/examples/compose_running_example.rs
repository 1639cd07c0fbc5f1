//! The whole pipeline on the running example: train the toy summarizer,
//! rank the call graph, and compose the two-line summary of `sendMessage`
//! with its provenance.
//!
//! ```bash
//! cargo run --release --example compose_running_example
//! ```

use std::path::Path;

use evsumm::callgraph::{pagerank, CallGraph, PageRankConfig};
use evsumm::pipeline::{compose_summary, load_sources, resolve_checkpoint, run_training, ComposeOptions, RunConfig, Summarizer};

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = RunConfig::load(&root.join("toy/train.conf"))?;
    let out_dir = std::env::temp_dir().join("evsumm-compose-example");
    run_training(&root.join("toy/pairs.jsonl"), &out_dir, &cfg)?;
    let summarizer = Summarizer::load(&resolve_checkpoint(&out_dir)?)?;

    let graph = CallGraph::load(&root.join("running_example/graph.json"))?;
    let sources = load_sources(&root.join("running_example/pairs.jsonl"))?;
    let ranks = pagerank(&graph, &PageRankConfig::default())?;

    let result = compose_summary(&graph, &ranks, 4, &summarizer, &sources, &ComposeOptions::default())?;
    for line in &result.summary_lines {
        println!("// {line}");
    }
    println!("public void sendMessage(View view) {{ ... }}\n");
    for p in &result.provenance {
        println!("line {} from node {} ({:?})", p.line, p.node_id, p.origin);
        println!("    encoder input: {}", p.decoder_input.join(" "));
    }
    Ok(())
}
