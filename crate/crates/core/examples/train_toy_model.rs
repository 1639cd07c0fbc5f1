//! Train a small summarizer on the bundled toy corpus, then summarize a
//! few of its methods with the final checkpoint.
//!
//! ```bash
//! cargo run --release --example train_toy_model
//! ```

use std::path::Path;

use evsumm::pipeline::{resolve_checkpoint, run_training, RunConfig, Summarizer};

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    let cfg = RunConfig::load(&data.join("train.conf"))?;
    let out_dir = std::env::temp_dir().join("evsumm-toy-model");

    let manifest = run_training(&data.join("pairs.jsonl"), &out_dir, &cfg)?;
    println!(
        "{} training pairs, vocab {}/{}, {} parameters",
        manifest.train_pairs, manifest.code_vocab, manifest.comment_vocab, manifest.num_params
    );
    println!("{:>5}  {:>10}  {:>10}", "epoch", "loss/tok", "perplexity");
    for rec in manifest.history.iter().filter(|r| r.epoch % 10 == 0 || r.epoch == 1) {
        println!(
            "{:>5}  {:>10.4}  {:>10.4}",
            rec.epoch,
            rec.train_loss / rec.train_tokens as f64,
            rec.train_perplexity
        );
    }

    let ckpt = resolve_checkpoint(&out_dir)?;
    println!("\nusing {}", ckpt.display());
    let summarizer = Summarizer::load(&ckpt)?;
    for source in [
        "public int getCount() { return items.size(); }",
        "public void onClick(View view) {}",
        "public void clear() { items.clear(); notifyDataSetChanged(); }",
        // Not in the training data.
        "public void reset() { items.clear(); }",
    ] {
        let summary = summarizer.summarize_method(source)?;
        println!("{source}\n    -> {}", summary.tokens.join(" "));
    }
    Ok(())
}
