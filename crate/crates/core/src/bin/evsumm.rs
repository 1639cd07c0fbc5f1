use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use evsumm::callgraph::{CallGraph, PageRankConfig, DEFAULT_MAX_ITER};
use evsumm::corpus::{corpus_stats, preprocess, read_raw_pairs, write_jsonl, FilterConfig};
use evsumm::pipeline::{
    load_sources, parse_aggregation, parse_meteor_mode, parse_tie_rule, rank_table, run_evaluation, run_training,
    summarize_graph, write_summaries, ComposeOptions, RunConfig, Summarizer,
};

#[derive(Parser)]
#[command(name = "evsumm", version, about = "Method summaries for event-driven programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize and filter raw comment/code pairs.
    Preprocess {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        min_comment: usize,
        #[arg(long, default_value_t = 35)]
        max_comment: usize,
        #[arg(long, default_value_t = 100)]
        max_code: usize,
    },
    /// Train a summarizer; writes one checkpoint per epoch.
    Train {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// PageRank a call graph.
    Rank {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Compose two-line summaries for every app method in a call graph.
    Summarize {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        /// A checkpoint file, or a training directory (uses its best epoch).
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        beam: Option<usize>,
        #[arg(long, default_value = "lowest_id")]
        tie_rule: String,
        #[arg(long)]
        min_block_rank: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score candidate summaries against references.
    Evaluate {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        references: PathBuf,
        #[arg(long, default_value = "paper_literal")]
        meteor_mode: String,
        #[arg(long, default_value = "corpus")]
        bleu_aggregation: String,
        /// Write the JSON report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Preprocess {
            pairs,
            out,
            min_comment,
            max_comment,
            max_code,
        } => {
            let filter = FilterConfig {
                min_comment,
                max_comment,
                max_code,
                ..Default::default()
            };
            let raw = read_raw_pairs(&pairs)?;
            let (kept, summary) = preprocess(&raw, &filter);
            write_jsonl(&out, &kept)?;
            let report = serde_json::json!({ "summary": summary, "stats": corpus_stats(&kept) });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Train {
            pairs,
            out_dir,
            config,
            embeddings,
            seed,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            if let Some(e) = embeddings {
                cfg.embeddings = Some(e);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.apply_env()?;
            cfg.check_paths()?;
            let manifest = run_training(&pairs, &out_dir, &cfg)?;
            match &manifest.best_checkpoint {
                Some(best) => println!("best checkpoint: {}", out_dir.join(best).display()),
                None => println!("no epochs run; no checkpoint written"),
            }
        }
        Command::Rank {
            graph,
            damping,
            tol,
            json,
        } => {
            let g = CallGraph::load(&graph)?;
            let rows = rank_table(
                &g,
                &PageRankConfig {
                    damping,
                    tolerance: tol,
                    max_iter: DEFAULT_MAX_ITER,
                },
            )?;
            let mut out = std::io::stdout().lock();
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
            } else {
                writeln!(out, "{:>6}  {:>9}  {:>8}  {:<9}  label", "node", "raw", "rank", "kind")?;
                for r in rows {
                    let kind = serde_json::to_value(r.kind)?;
                    writeln!(
                        out,
                        "{:>6}  {:>9.5}  {:>8.4}  {:<9}  {}",
                        r.id,
                        r.raw,
                        r.normalized,
                        kind.as_str().unwrap_or(""),
                        r.label
                    )?;
                }
            }
        }
        Command::Summarize {
            graph,
            pairs,
            checkpoint,
            out,
            beam,
            tie_rule,
            min_block_rank,
            seed,
        } => {
            let Some(tie_rule) = parse_tie_rule(&tie_rule) else {
                bail!("--tie-rule must be lowest_id or random, got {tie_rule:?}");
            };
            let mut cfg = RunConfig::default();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.apply_env()?;
            let g = CallGraph::load(&graph)?;
            let sources = load_sources(&pairs)?;
            let mut summarizer =
                Summarizer::load(&checkpoint).with_context(|| format!("loading {}", checkpoint.display()))?;
            if let Some(b) = beam {
                summarizer = summarizer.with_beam(b);
            }
            let opts = ComposeOptions {
                tie_rule,
                min_block_rank,
                seed: cfg.seed,
            };
            let results = summarize_graph(&g, &summarizer, &sources, &PageRankConfig::default(), &opts)?;
            write_summaries(&out, &results)?;
            log::info!("wrote {} summaries to {}", results.len(), out.display());
        }
        Command::Evaluate {
            candidates,
            references,
            meteor_mode,
            bleu_aggregation,
            out,
        } => {
            let mut cfg = RunConfig::default().eval;
            let Some(mode) = parse_meteor_mode(&meteor_mode) else {
                bail!("--meteor-mode must be paper_literal or standard, got {meteor_mode:?}");
            };
            let Some(agg) = parse_aggregation(&bleu_aggregation) else {
                bail!("--bleu-aggregation must be corpus or mean, got {bleu_aggregation:?}");
            };
            cfg.meteor_mode = mode;
            cfg.bleu_aggregation = agg;
            cfg.both_meteor_modes = true;
            let report = run_evaluation(&candidates, &references, &cfg)?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(p) = out {
                std::fs::write(p, &text)?;
            }
            println!("{text}");
        }
    }
    Ok(())
}
