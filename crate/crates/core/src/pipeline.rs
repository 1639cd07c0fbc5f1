//! End-to-end plumbing: run configuration, the training driver with
//! per-epoch checkpoints, method summarization, two-line summary
//! composition over a ranked call graph, and file-based evaluation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callgraph::{pagerank, select_context_block, synthesize_dummy, CallGraph, GraphError, NodeId, NodeKind, PageRankConfig, RankVector, TieRule};
use crate::corpus::{
    build_vocab, load_training_pairs, read_jsonl, split_dataset, write_jsonl, CorpusError, FilterConfig, PairRecord, TokenizedPair,
    Vocabulary,
};
use crate::embeddings::{EmbeddingError, EmbeddingTable};
use crate::metrics::{evaluate, Aggregation, EvalConfig, MetricError, MetricReport, MeteorMode};
use crate::model::{decode_example, init_params, train, Checkpoint, EpochRecord, Example, ModelConfig, ModelError};
use crate::tokenizer::{tokenize, Origin};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "EVSUMM_SEED";

/// Name of the training manifest written next to the epoch checkpoints.
pub const MANIFEST_FILE: &str = "training.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("config {origin}: {message}")]
    Config { origin: String, message: String },
    #[error("node {node} is not an app method")]
    NotAppMethod { node: NodeId },
    #[error("node {node} has no source")]
    MissingSource { node: NodeId },
    #[error("node {node} refers to source {source_ref:?}, which is not in the pairs file")]
    UnresolvedSource { node: NodeId, source_ref: String },
    #[error("{path}: {message}")]
    BadRecord { path: String, message: String },
    #[error("unmatched ids; only in candidates: {only_candidates:?}; only in references: {only_references:?}")]
    IdMismatch {
        only_candidates: Vec<String>,
        only_references: Vec<String>,
    },
    #[error("{0} contains no records")]
    EmptyInput(String),
    #[error("{0}: no checkpoint found")]
    NoCheckpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn config_err(origin: &str, message: impl Into<String>) -> PipelineError {
    PipelineError::Config {
        origin: origin.to_string(),
        message: message.into(),
    }
}

/// Parses `lowest_id` / `random` (and `seeded_random`).
pub fn parse_tie_rule(s: &str) -> Option<TieRule> {
    match s {
        "lowest_id" => Some(TieRule::LowestId),
        "random" | "seeded_random" => Some(TieRule::SeededRandom),
        _ => None,
    }
}

/// Parses `corpus` / `mean` (and `mean_of_sentences`).
pub fn parse_aggregation(s: &str) -> Option<Aggregation> {
    match s {
        "corpus" => Some(Aggregation::Corpus),
        "mean" | "mean_of_sentences" => Some(Aggregation::MeanOfSentences),
        _ => None,
    }
}

pub fn parse_meteor_mode(s: &str) -> Option<MeteorMode> {
    match s {
        "paper_literal" => Some(MeteorMode::PaperLiteral),
        "standard" => Some(MeteorMode::Standard),
        _ => None,
    }
}

/// Everything a run needs. Loaded from a flat `key = value` file; keys are
/// the field names below, plus the model keys `embedding_dim`, `hidden_dim`,
/// `num_layers`, `dropout`, `beam_width`, `length_normalization`,
/// `clip_threshold`, `learning_rate`, `epochs`, `batch_size`,
/// `freeze_pretrained` and the filter keys `min_comment`, `max_comment`,
/// `max_code`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pairs: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: ModelConfig,
    pub filter: FilterConfig,
    /// Train/valid/test fractions.
    pub split: (f64, f64, f64),
    pub max_vocab: Option<usize>,
    pub min_freq: usize,
    pub damping: f64,
    pub tolerance: f64,
    pub tie_rule: TieRule,
    pub min_block_rank: Option<f64>,
    pub eval: EvalConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pairs: None,
            graph: None,
            embeddings: None,
            checkpoint: None,
            output: None,
            model: ModelConfig::default(),
            filter: FilterConfig::default(),
            split: (0.8, 0.1, 0.1),
            max_vocab: None,
            min_freq: 1,
            damping: crate::callgraph::DEFAULT_DAMPING,
            tolerance: crate::callgraph::DEFAULT_TOLERANCE,
            tie_rule: TieRule::default(),
            min_block_rank: None,
            eval: EvalConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Sets one key. `origin` names the source in error messages.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), PipelineError> {
        fn num<T: std::str::FromStr>(value: &str, key: &str, origin: &str) -> Result<T, PipelineError> {
            value.parse().map_err(|_| config_err(origin, format!("{key}: cannot parse {value:?}")))
        }
        let path = || Some(PathBuf::from(value));
        match key {
            "pairs" => self.pairs = path(),
            "graph" => self.graph = path(),
            "embeddings" => self.embeddings = path(),
            "checkpoint" => self.checkpoint = path(),
            "output" => self.output = path(),
            "embedding_dim" => self.model.embedding_dim = num(value, key, origin)?,
            "hidden_dim" => self.model.hidden_dim = num(value, key, origin)?,
            "num_layers" => self.model.num_layers = num(value, key, origin)?,
            "dropout" | "dropout_rate" => self.model.dropout = num(value, key, origin)?,
            "beam_width" => self.model.beam_width = num(value, key, origin)?,
            "length_normalization" => self.model.length_normalization = num(value, key, origin)?,
            "clip_threshold" => self.model.clip_threshold = num(value, key, origin)?,
            "learning_rate" => self.model.adam.learning_rate = num(value, key, origin)?,
            "epochs" => self.model.epochs = num(value, key, origin)?,
            "batch_size" => self.model.batch_size = num(value, key, origin)?,
            "freeze_pretrained" => self.model.freeze_pretrained = num(value, key, origin)?,
            "min_comment" => self.filter.min_comment = num(value, key, origin)?,
            "max_comment" => self.filter.max_comment = num(value, key, origin)?,
            "max_code" => self.filter.max_code = num(value, key, origin)?,
            "train_ratio" => self.split.0 = num(value, key, origin)?,
            "valid_ratio" => self.split.1 = num(value, key, origin)?,
            "test_ratio" => self.split.2 = num(value, key, origin)?,
            "max_vocab" => self.max_vocab = Some(num(value, key, origin)?),
            "min_freq" => self.min_freq = num(value, key, origin)?,
            "damping" => self.damping = num(value, key, origin)?,
            "tolerance" => self.tolerance = num(value, key, origin)?,
            "tie_rule" => {
                self.tie_rule = parse_tie_rule(value).ok_or_else(|| config_err(origin, format!("unknown tie rule {value:?}")))?
            }
            "min_block_rank" => self.min_block_rank = Some(num(value, key, origin)?),
            "meteor_mode" => {
                self.eval.meteor_mode =
                    parse_meteor_mode(value).ok_or_else(|| config_err(origin, format!("unknown METEOR mode {value:?}")))?
            }
            "bleu_aggregation" => {
                self.eval.bleu_aggregation =
                    parse_aggregation(value).ok_or_else(|| config_err(origin, format!("unknown aggregation {value:?}")))?
            }
            "seed" => self.seed = num(value, key, origin)?,
            _ => return Err(config_err(origin, format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self, PipelineError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("{origin}:{}", i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(&at, format!("expected key = value, got {line:?}")))?;
            cfg.set(key.trim(), value.trim(), &at)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Self::parse(&fs::read_to_string(path)?, &path.display().to_string())
    }

    /// Applies `EVSUMM_SEED` if set.
    pub fn apply_env(&mut self) -> Result<(), PipelineError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| config_err(SEED_ENV, format!("cannot parse {v:?}")))?;
        }
        Ok(())
    }

    /// Every configured input path must exist.
    pub fn check_paths(&self) -> Result<(), PipelineError> {
        for (name, p) in [
            ("pairs", &self.pairs),
            ("graph", &self.graph),
            ("embeddings", &self.embeddings),
            ("checkpoint", &self.checkpoint),
        ] {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(config_err(name, format!("{} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}

/// Written to `training.json` in the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub seed: u64,
    pub train_pairs: usize,
    pub valid_pairs: usize,
    pub test_pairs: usize,
    pub code_vocab: usize,
    pub comment_vocab: usize,
    pub num_params: usize,
    pub history: Vec<EpochRecord>,
    pub checkpoints: Vec<String>,
    pub best_epoch: Option<usize>,
    pub best_checkpoint: Option<String>,
}

pub fn checkpoint_name(epoch: usize) -> String {
    format!("epoch-{epoch:03}.ckpt")
}

fn examples(pairs: &[&TokenizedPair], code_vocab: &Vocabulary, comment_vocab: &Vocabulary) -> Result<Vec<Example>, CorpusError> {
    pairs
        .iter()
        .map(|p| PairRecord::encode(p, code_vocab, comment_vocab).map(|r| Example::from_ids(&r.code_ids, &r.comment_ids)))
        .collect()
}

/// Loads and splits the pairs, builds vocabularies from the training split,
/// trains, and writes one checkpoint per epoch plus `training.json`,
/// `split.json` and the two vocabulary files into `out_dir`.
pub fn run_training(pairs_path: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<TrainingManifest, PipelineError> {
    let pairs = load_training_pairs(pairs_path, &cfg.filter)?;
    if pairs.is_empty() {
        return Err(PipelineError::EmptyInput(pairs_path.display().to_string()));
    }
    let ids: Vec<String> = pairs.iter().map(|p| p.id.clone()).collect();
    let split = split_dataset(&ids, cfg.split, cfg.seed)?;
    let by_id: HashMap<&str, &TokenizedPair> = pairs.iter().map(|p| (p.id.as_str(), p)).collect();
    let pick = |ids: &[String]| ids.iter().map(|id| by_id[id.as_str()]).collect::<Vec<_>>();
    let (train_pairs, valid_pairs) = (pick(&split.train), pick(&split.valid));
    if train_pairs.is_empty() {
        return Err(ModelError::EmptyTrainingSet.into());
    }
    let code_vocab = build_vocab(train_pairs.iter().map(|p| p.code_tokens.as_slice()), cfg.max_vocab, cfg.min_freq)?;
    let comment_vocab = build_vocab(train_pairs.iter().map(|p| p.comment_tokens.as_slice()), cfg.max_vocab, cfg.min_freq)?;
    let model = ModelConfig {
        code_vocab: code_vocab.len(),
        comment_vocab: comment_vocab.len(),
        seed: cfg.seed,
        ..cfg.model.clone()
    };
    let pretrained = cfg.embeddings.as_deref().map(EmbeddingTable::load).transpose()?;
    let (params, frozen) = init_params(&model, &code_vocab, &comment_vocab, pretrained.as_ref())?;
    let train_set = examples(&train_pairs, &code_vocab, &comment_vocab)?;
    let valid_set = examples(&valid_pairs, &code_vocab, &comment_vocab)?;
    log::info!(
        "training on {} pairs ({} valid), vocab {}/{}, {} parameters",
        train_set.len(),
        valid_set.len(),
        code_vocab.len(),
        comment_vocab.len(),
        params.num_params()
    );

    fs::create_dir_all(out_dir)?;
    code_vocab.write(&out_dir.join("code.vocab"))?;
    comment_vocab.write(&out_dir.join("comment.vocab"))?;
    fs::write(out_dir.join("split.json"), serde_json::to_string_pretty(&split)?)?;

    let mut checkpoints = Vec::new();
    let num_params = params.num_params();
    let outcome = train(params, &model, &train_set, &valid_set, Some(&frozen), |rec, params, optimizer| {
        let name = checkpoint_name(rec.epoch);
        Checkpoint {
            config: model.clone(),
            epoch: rec.epoch,
            valid_bleu4: rec.valid_bleu4,
            code_vocab: code_vocab.clone(),
            comment_vocab: comment_vocab.clone(),
            params: params.clone(),
            optimizer: optimizer.clone(),
        }
        .save(&out_dir.join(&name))?;
        checkpoints.push(name);
        Ok(ControlFlow::Continue(()))
    })?;
    let manifest = TrainingManifest {
        seed: cfg.seed,
        train_pairs: train_set.len(),
        valid_pairs: valid_set.len(),
        test_pairs: split.test.len(),
        code_vocab: code_vocab.len(),
        comment_vocab: comment_vocab.len(),
        num_params,
        history: outcome.history,
        best_checkpoint: outcome.best_epoch.map(checkpoint_name),
        best_epoch: outcome.best_epoch,
        checkpoints,
    };
    fs::write(out_dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// A checkpoint file as given, or for a training directory the checkpoint
/// named best in its manifest.
pub fn resolve_checkpoint(path: &Path) -> Result<PathBuf, PipelineError> {
    if !path.is_dir() {
        return Ok(path.to_path_buf());
    }
    let manifest: TrainingManifest = serde_json::from_str(&fs::read_to_string(path.join(MANIFEST_FILE))?)?;
    let best = manifest
        .best_checkpoint
        .ok_or_else(|| PipelineError::NoCheckpoint(path.display().to_string()))?;
    Ok(path.join(best))
}

/// Output of [`Summarizer::summarize_tokens`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSummary {
    /// Comment tokens without SOS/EOS.
    pub tokens: Vec<String>,
    /// Code tokens that reached the encoder, after truncation.
    pub decoder_input: Vec<String>,
    pub truncated: bool,
}

/// A loaded checkpoint ready for inference. Shared read-only across
/// worker threads.
#[derive(Debug, Clone)]
pub struct Summarizer {
    pub checkpoint: Checkpoint,
    pub beam_width: usize,
}

impl Summarizer {
    pub fn new(checkpoint: Checkpoint) -> Self {
        let beam_width = checkpoint.config.beam_width;
        Self { checkpoint, beam_width }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Ok(Self::new(Checkpoint::load(&resolve_checkpoint(path)?)?))
    }

    pub fn with_beam(mut self, width: usize) -> Self {
        self.beam_width = width;
        self
    }

    /// Tokenizes raw method source and summarizes it.
    pub fn summarize_method(&self, source: &str) -> Result<MethodSummary, PipelineError> {
        self.summarize_tokens(&tokenize(source, Origin::Code).tokens)
    }

    /// Beam-decodes a comment for already tokenized code. Inputs longer than
    /// the model's code length are truncated with a warning.
    pub fn summarize_tokens(&self, code_tokens: &[String]) -> Result<MethodSummary, PipelineError> {
        let ck = &self.checkpoint;
        let max = ck.config.max_code_len;
        let truncated = code_tokens.len() > max;
        if truncated {
            log::warn!("method has {} code tokens, truncating to {max}", code_tokens.len());
        }
        let input = &code_tokens[..code_tokens.len().min(max)];
        let ids: Vec<u32> = input.iter().map(|t| ck.code_vocab.id(t)).collect();
        let decoded = decode_example(&ck.params, &ck.config, &ids, self.beam_width)?;
        Ok(MethodSummary {
            tokens: ck.comment_vocab.decode(&decoded.tokens),
            decoder_input: input.to_vec(),
            truncated,
        })
    }
}

/// Renders comment tokens as a sentence: first letter capitalized,
/// punctuation attached to the preceding word.
pub fn render_line(tokens: &[String]) -> String {
    let mut out = String::new();
    for tok in tokens {
        let attach = matches!(tok.as_str(), "." | "," | ";" | ":" | "?" | "!" | ")");
        if !out.is_empty() && !attach && !out.ends_with('(') {
            out.push(' ');
        }
        out.push_str(tok);
    }
    let mut chars = out.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineOrigin {
    /// The target method's own source.
    MethodSource,
    /// Source of an app-method context block.
    BlockSource,
    /// A dummy method synthesized from a framework block's label.
    DummyMethod,
}

/// Where one summary line came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineProvenance {
    /// 1-based line number.
    pub line: usize,
    pub origin: LineOrigin,
    pub node_id: NodeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_ref: Option<String>,
    pub tokens: Vec<String>,
    pub decoder_input: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextBlock {
    pub node_id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub rank: f64,
    pub block_summary: Vec<String>,
}

/// One output record of `summarize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResult {
    pub method_id: NodeId,
    pub method_label: String,
    pub method_summary: Vec<String>,
    /// Line 1 is always the method summary; line 2, when present, the
    /// context block's summary.
    pub summary_lines: Vec<String>,
    pub context_block_id: Option<NodeId>,
    pub context_block_kind: Option<NodeKind>,
    pub context_block: Option<ContextBlock>,
    pub provenance: Vec<LineProvenance>,
}

/// Method sources by id, from a pairs file.
pub type SourceMap = HashMap<String, Vec<String>>;

/// Reads `{"id", "code"}` or `{"id", "code_tokens"}` records; other fields
/// are ignored.
pub fn load_sources(path: &Path) -> Result<SourceMap, PipelineError> {
    let values: Vec<serde_json::Value> = read_jsonl(path)?;
    let bad = |message: String| PipelineError::BadRecord {
        path: path.display().to_string(),
        message,
    };
    let mut out = HashMap::new();
    for v in values {
        let id = v.get("id").and_then(|x| x.as_str()).ok_or_else(|| bad("record without a string id".into()))?;
        let tokens = if let Some(code) = v.get("code").and_then(|x| x.as_str()) {
            tokenize(code, Origin::Code).tokens
        } else if let Some(toks) = v.get("code_tokens") {
            serde_json::from_value(toks.clone()).map_err(|e| bad(format!("{id}: {e}")))?
        } else {
            return Err(bad(format!("{id}: no code or code_tokens")));
        };
        if out.insert(id.to_string(), tokens).is_some() {
            return Err(bad(format!("duplicate id {id}")));
        }
    }
    Ok(out)
}

/// Selection settings for [`compose_summary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeOptions {
    pub tie_rule: TieRule,
    pub min_block_rank: Option<f64>,
    pub seed: u64,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self {
            tie_rule: TieRule::LowestId,
            min_block_rank: None,
            seed: 0,
        }
    }
}

fn node_source<'a>(graph: &CallGraph, sources: &'a SourceMap, id: NodeId) -> Result<(&'a [String], String), PipelineError> {
    let node = graph.node(id).ok_or(GraphError::UnknownNode(id))?;
    let source_ref = node.source_ref.clone().ok_or(PipelineError::MissingSource { node: id })?;
    let tokens = sources.get(&source_ref).ok_or_else(|| PipelineError::UnresolvedSource {
        node: id,
        source_ref: source_ref.clone(),
    })?;
    Ok((tokens, source_ref))
}

/// Summarizes `target` and, when it has a ranked predecessor, that
/// predecessor: from its real source for app methods, from a dummy method
/// built from its label for framework callbacks. The tie-break generator
/// is seeded from `seed` and the target id, so results do not depend on
/// processing order.
pub fn compose_summary(
    graph: &CallGraph,
    ranks: &RankVector,
    target: NodeId,
    summarizer: &Summarizer,
    sources: &SourceMap,
    opts: &ComposeOptions,
) -> Result<SummaryResult, PipelineError> {
    let node = graph.node(target).ok_or(GraphError::UnknownNode(target))?;
    if node.kind != NodeKind::App {
        return Err(PipelineError::NotAppMethod { node: target });
    }
    let (code, source_ref) = node_source(graph, sources, target)?;
    let method = summarizer.summarize_tokens(code)?;
    let mut provenance = vec![LineProvenance {
        line: 1,
        origin: LineOrigin::MethodSource,
        node_id: target,
        source_ref: Some(source_ref),
        tokens: method.tokens.clone(),
        decoder_input: method.decoder_input.clone(),
    }];
    let mut lines = vec![render_line(&method.tokens)];

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ target.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let block_id = select_context_block(graph, ranks, target, opts.tie_rule, opts.min_block_rank, &mut rng)?;
    let mut block = None;
    if let Some(id) = block_id {
        let b = graph.node(id).ok_or(GraphError::UnknownNode(id))?;
        let (summary, origin, source_ref) = match b.kind {
            NodeKind::App => {
                let (code, source_ref) = node_source(graph, sources, id)?;
                (summarizer.summarize_tokens(code)?, LineOrigin::BlockSource, Some(source_ref))
            }
            NodeKind::Framework => {
                let dummy = synthesize_dummy(&b.label)?;
                (summarizer.summarize_tokens(&dummy.tokens)?, LineOrigin::DummyMethod, None)
            }
        };
        lines.push(render_line(&summary.tokens));
        provenance.push(LineProvenance {
            line: 2,
            origin,
            node_id: id,
            source_ref,
            tokens: summary.tokens.clone(),
            decoder_input: summary.decoder_input,
        });
        block = Some(ContextBlock {
            node_id: id,
            label: b.label.clone(),
            kind: b.kind,
            rank: ranks.get(id).unwrap_or(0.0),
            block_summary: summary.tokens,
        });
    }
    Ok(SummaryResult {
        method_id: target,
        method_label: node.label.clone(),
        method_summary: method.tokens,
        summary_lines: lines,
        context_block_id: block.as_ref().map(|b| b.node_id),
        context_block_kind: block.as_ref().map(|b| b.kind),
        context_block: block,
        provenance,
    })
}

/// App methods with a source reference, in id order.
pub fn summary_targets(graph: &CallGraph) -> Vec<NodeId> {
    graph
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::App && n.source_ref.is_some())
        .map(|n| n.id)
        .collect()
}

/// Ranks the graph and composes a summary for every target, in parallel.
/// Results come back in target order whatever the thread count.
pub fn summarize_graph(
    graph: &CallGraph,
    summarizer: &Summarizer,
    sources: &SourceMap,
    rank_config: &PageRankConfig,
    opts: &ComposeOptions,
) -> Result<Vec<SummaryResult>, PipelineError> {
    let ranks = pagerank(graph, rank_config)?;
    summary_targets(graph)
        .par_iter()
        .map(|&id| compose_summary(graph, &ranks, id, summarizer, sources, opts))
        .collect()
}

/// One row of the `rank` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub raw: f64,
    pub normalized: f64,
}

pub fn rank_table(graph: &CallGraph, config: &PageRankConfig) -> Result<Vec<RankRow>, PipelineError> {
    let ranks = pagerank(graph, config)?;
    Ok(graph
        .nodes()
        .iter()
        .map(|n| RankRow {
            id: n.id,
            label: n.label.clone(),
            kind: n.kind,
            raw: ranks.raw[&n.id],
            normalized: ranks.normalized[&n.id],
        })
        .collect())
}

/// Reads `id -> tokens` from an evaluation file. Each record carries an
/// `id` (or `method_id`) and one of `tokens` (already tokenized),
/// `text`, `comment` or `summary_lines` (first line; the method summary),
/// which are run through the comment tokenizer.
pub fn load_eval_records(path: &Path) -> Result<Vec<(String, Vec<String>)>, PipelineError> {
    let values: Vec<serde_json::Value> = read_jsonl(path)?;
    if values.is_empty() {
        return Err(PipelineError::EmptyInput(path.display().to_string()));
    }
    let bad = |message: String| PipelineError::BadRecord {
        path: path.display().to_string(),
        message,
    };
    let mut out = Vec::with_capacity(values.len());
    let mut seen = HashSet::new();
    for (i, v) in values.iter().enumerate() {
        let id = match v.get("id").or_else(|| v.get("method_id")) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Number(n)) => n.to_string(),
            _ => return Err(bad(format!("record {} has no id", i + 1))),
        };
        let text = |key: &str| v.get(key).and_then(|x| x.as_str()).map(|s| tokenize(s, Origin::Comment).tokens);
        let tokens = if let Some(t) = v.get("tokens") {
            serde_json::from_value(t.clone()).map_err(|e| bad(format!("{id}: {e}")))?
        } else if let Some(t) = text("text").or_else(|| text("comment")) {
            t
        } else if let Some(first) = v.get("summary_lines").and_then(|l| l.get(0)).and_then(|x| x.as_str()) {
            tokenize(first, Origin::Comment).tokens
        } else {
            return Err(bad(format!("{id}: no tokens, text, comment or summary_lines")));
        };
        if !seen.insert(id.clone()) {
            return Err(bad(format!("duplicate id {id}")));
        }
        out.push((id, tokens));
    }
    Ok(out)
}

/// Scores candidates against references matched by id, in reference order.
pub fn run_evaluation(candidates: &Path, references: &Path, config: &EvalConfig) -> Result<MetricReport, PipelineError> {
    let cands = load_eval_records(candidates)?;
    let refs = load_eval_records(references)?;
    let cand_map: BTreeMap<&str, &Vec<String>> = cands.iter().map(|(id, t)| (id.as_str(), t)).collect();
    let ref_ids: HashSet<&str> = refs.iter().map(|(id, _)| id.as_str()).collect();
    let only_candidates: Vec<String> = cand_map.keys().filter(|id| !ref_ids.contains(*id)).map(|s| s.to_string()).collect();
    let only_references: Vec<String> =
        refs.iter().filter(|(id, _)| !cand_map.contains_key(id.as_str())).map(|(id, _)| id.clone()).collect();
    if !only_candidates.is_empty() || !only_references.is_empty() {
        return Err(PipelineError::IdMismatch {
            only_candidates,
            only_references,
        });
    }
    let ids: Vec<String> = refs.iter().map(|(id, _)| id.clone()).collect();
    let ref_tokens: Vec<Vec<String>> = refs.iter().map(|(_, t)| t.clone()).collect();
    let cand_tokens: Vec<Vec<String>> = ids.iter().map(|id| cand_map[id.as_str()].clone()).collect();
    Ok(evaluate(Some(&ids), &cand_tokens, &ref_tokens, config)?)
}

/// Writes summaries as JSON Lines.
pub fn write_summaries(path: &Path, results: &[SummaryResult]) -> Result<(), PipelineError> {
    write_jsonl(path, results)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let text = "# desk run\nepochs = 3\nhidden_dim=16\n\ntie_rule = random\nmin_block_rank = 0.05 # trailing\npairs = a.jsonl\n";
        let cfg = RunConfig::parse(text, "t").unwrap();
        assert_eq!(cfg.model.epochs, 3);
        assert_eq!(cfg.model.hidden_dim, 16);
        assert_eq!(cfg.tie_rule, TieRule::SeededRandom);
        assert_eq!(cfg.min_block_rank, Some(0.05));
        assert_eq!(cfg.pairs, Some(PathBuf::from("a.jsonl")));
        assert!(matches!(RunConfig::parse("bogus = 1", "t"), Err(PipelineError::Config { .. })));
        assert!(matches!(RunConfig::parse("epochs", "t"), Err(PipelineError::Config { .. })));
        assert!(matches!(RunConfig::parse("epochs = x", "t"), Err(PipelineError::Config { .. })));
    }

    #[test]
    fn missing_paths_are_reported() {
        let cfg = RunConfig {
            graph: Some(PathBuf::from("/nonexistent/graph.json")),
            ..Default::default()
        };
        assert!(cfg.check_paths().is_err());
        assert!(RunConfig::default().check_paths().is_ok());
    }

    #[test]
    fn rendering() {
        let toks = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
        assert_eq!(
            render_line(&toks("sends a message to the specified service .")),
            "Sends a message to the specified service."
        );
        assert_eq!(render_line(&toks("calls f ( x ) , then g")), "Calls f (x), then g");
        assert_eq!(render_line(&[]), "");
    }

    #[test]
    fn option_parsers() {
        assert_eq!(parse_tie_rule("lowest_id"), Some(TieRule::LowestId));
        assert_eq!(parse_tie_rule("random"), Some(TieRule::SeededRandom));
        assert_eq!(parse_aggregation("mean"), Some(Aggregation::MeanOfSentences));
        assert_eq!(parse_meteor_mode("standard"), Some(MeteorMode::Standard));
        assert_eq!(parse_meteor_mode("x"), None);
    }
}
