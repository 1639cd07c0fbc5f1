use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::decode::{beam_decode, sequence_score, BeamConfig, Decoded, Seq2SeqStep};
use super::network::{encode, loss, loss_and_gradients, Example, Mode};
use super::optim::{clip_gradients, Adam};
use super::params::{ParamSet, Tensor};
use super::{ModelConfig, ModelError};
use crate::corpus::Vocabulary;
use crate::embeddings::EmbeddingTable;
use crate::metrics::{bleu4, Aggregation};

/// Embedding rows initialized from pretrained vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrozenRows {
    pub src: Vec<bool>,
    pub tgt: Vec<bool>,
}

impl FrozenRows {
    fn apply(&self, grad: &mut ParamSet) {
        let zero_rows = |t: &mut Tensor, rows: &[bool]| {
            for (r, &frozen) in rows.iter().enumerate() {
                if frozen {
                    t.row_mut(r).fill(0.0);
                }
            }
        };
        zero_rows(&mut grad.src_embed, &self.src);
        zero_rows(&mut grad.tgt_embed, &self.tgt);
    }
}

/// Fresh parameters for the given vocabularies. Embedding rows take their
/// pretrained vector when one exists and a uniform `[-1, 1]` draw otherwise;
/// a word shared by both vocabularies starts from the same vector.
pub fn init_params(
    config: &ModelConfig,
    code_vocab: &Vocabulary,
    comment_vocab: &Vocabulary,
    pretrained: Option<&EmbeddingTable>,
) -> Result<(ParamSet, FrozenRows), ModelError> {
    config.validate()?;
    if code_vocab.len() != config.code_vocab || comment_vocab.len() != config.comment_vocab {
        return Err(ModelError::InvalidConfig(format!(
            "config vocab sizes ({}, {}) differ from vocabularies ({}, {})",
            config.code_vocab,
            config.comment_vocab,
            code_vocab.len(),
            comment_vocab.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ParamSet::init(config, &mut rng);
    let mut table = match pretrained {
        Some(t) if t.dimension() != config.embedding_dim => {
            return Err(ModelError::EmbeddingDimension {
                expected: config.embedding_dim,
                found: t.dimension(),
            })
        }
        Some(t) => t.clone(),
        None => EmbeddingTable::new(config.embedding_dim),
    };
    let mut frozen = FrozenRows::default();
    for (vocab, matrix, rows) in [
        (code_vocab, &mut params.src_embed, &mut frozen.src),
        (comment_vocab, &mut params.tgt_embed, &mut frozen.tgt),
    ] {
        for (id, token) in vocab.tokens().iter().enumerate() {
            rows.push(pretrained.is_some_and(|p| p.contains(token)));
            let v = table.lookup_or_init(token, &mut rng);
            matrix.row_mut(id).copy_from_slice(v);
        }
    }
    Ok((params, frozen))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Summed training loss under dropout.
    pub train_loss: f64,
    pub train_tokens: usize,
    pub train_perplexity: f64,
    pub grad_norm: f64,
    pub valid_bleu4: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ParamSet,
    pub optimizer: Adam,
    pub history: Vec<EpochRecord>,
    /// Epoch with the highest validation BLEU4 (earliest on ties), or the
    /// last epoch when there is no validation set.
    pub best_epoch: Option<usize>,
}

/// Beam-decodes one source. The result never exceeds
/// `config.max_comment_len` tokens: a hypothesis that ran out of steps
/// without EOS is cut back and rescored.
pub fn decode_example(params: &ParamSet, config: &ModelConfig, source: &[u32], width: usize) -> Result<Decoded, ModelError> {
    let encoded = encode(params, config, source, &mut Mode::Infer)?;
    let model = Seq2SeqStep {
        params,
        config,
        encoded: &encoded,
    };
    let mut decoded = beam_decode(
        &model,
        &BeamConfig {
            width,
            max_steps: config.max_comment_len + 1,
            length_normalization: config.length_normalization,
        },
    );
    if decoded.tokens.len() > config.max_comment_len {
        decoded.tokens.truncate(config.max_comment_len);
        decoded.score = sequence_score(&model, &decoded.tokens, false);
    }
    Ok(decoded)
}

/// Per-token perplexity without dropout.
pub fn corpus_perplexity(params: &ParamSet, config: &ModelConfig, examples: &[Example]) -> Result<f64, ModelError> {
    let (total, count) = loss(params, config, examples, &mut Mode::Infer)?;
    Ok(crate::metrics::perplexity(total, count.max(1)))
}

fn validation_bleu(params: &ParamSet, config: &ModelConfig, valid: &[Example]) -> Result<Option<f64>, ModelError> {
    if valid.is_empty() {
        return Ok(None);
    }
    let mut candidates = Vec::with_capacity(valid.len());
    for ex in valid {
        candidates.push(decode_example(params, config, &ex.source, config.beam_width)?.tokens);
    }
    let references: Vec<Vec<u32>> = valid.iter().map(|ex| ex.target.clone()).collect();
    Ok(Some(bleu4(&candidates, &references, Aggregation::Corpus, false).expect("nonempty, aligned")))
}

/// Mini-batch training: each batch runs loss, backward, clipping and an
/// Adam step. Batches are reshuffled every epoch from `seed + epoch`.
/// `on_epoch` sees every finished epoch and may stop training early.
pub fn train(
    params: ParamSet,
    config: &ModelConfig,
    train_set: &[Example],
    valid_set: &[Example],
    frozen: Option<&FrozenRows>,
    mut on_epoch: impl FnMut(&EpochRecord, &ParamSet, &Adam) -> Result<ControlFlow<()>, ModelError>,
) -> Result<TrainOutcome, ModelError> {
    config.validate()?;
    let mut params = params;
    let mut optimizer = Adam::new(config.adam, &params);
    let mut history = Vec::new();
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            params,
            optimizer,
            history,
            best_epoch: None,
        });
    }
    if train_set.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.epochs {
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(epoch as u64));
        order.sort_unstable();
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut epoch_tokens = 0;
        let mut grad_norm = 0.0f64;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let (batch_loss, tokens, mut grad) =
                match loss_and_gradients(&params, config, &batch, &mut Mode::Train(&mut dropout_rng)) {
                    Ok(v) => v,
                    Err(ModelError::NonFiniteLoss(loss)) => return Err(ModelError::Diverged { epoch, loss }),
                    Err(ModelError::NonFiniteGradient) => {
                        return Err(ModelError::Diverged {
                            epoch,
                            loss: f64::NAN,
                        })
                    }
                    Err(e) => return Err(e),
                };
            if let Some(f) = frozen.filter(|_| config.freeze_pretrained) {
                f.apply(&mut grad);
            }
            grad_norm = grad_norm.max(clip_gradients(&mut grad, config.clip_threshold));
            optimizer.step(&mut params, &grad);
            epoch_loss += batch_loss;
            epoch_tokens += tokens;
        }
        let record = EpochRecord {
            epoch,
            train_loss: epoch_loss,
            train_tokens: epoch_tokens,
            train_perplexity: crate::metrics::perplexity(epoch_loss, epoch_tokens.max(1)),
            grad_norm,
            valid_bleu4: validation_bleu(&params, config, valid_set)?,
        };
        log::info!(
            "epoch {epoch}: loss/token {:.4} ppl {:.4} valid bleu4 {:?}",
            record.train_loss / record.train_tokens.max(1) as f64,
            record.train_perplexity,
            record.valid_bleu4
        );
        let flow = on_epoch(&record, &params, &optimizer)?;
        history.push(record);
        if flow.is_break() {
            break;
        }
    }
    let best_epoch = best_epoch(&history);
    Ok(TrainOutcome {
        params,
        optimizer,
        history,
        best_epoch,
    })
}

pub(crate) fn best_epoch(history: &[EpochRecord]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for rec in history {
        if let Some(b) = rec.valid_bleu4 {
            if best.is_none_or(|(bb, _)| b > bb) {
                best = Some((b, rec.epoch));
            }
        }
    }
    best.map(|(_, e)| e).or_else(|| history.last().map(|r| r.epoch))
}
