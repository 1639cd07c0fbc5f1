//! The neural summarizer: a stacked bidirectional LSTM encoder, an additive
//! attention LSTM decoder, cross-entropy training with global-norm gradient
//! clipping and Adam, and greedy/beam decoding.
//!
//! All arithmetic is `f64` and single-threaded so a fixed seed reproduces a
//! training run bit for bit.

mod checkpoint;
mod decode;
mod network;
mod optim;
mod params;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use decode::{beam_decode, greedy_decode, sequence_score, BeamConfig, BeamHypothesis, Decoded, Seq2SeqStep, StepModel};
pub use network::{
    attention, decode_step, encode, initial_state, log_softmax, loss, loss_and_gradients, softmax, source_len,
    Attention, DecoderState, EncoderStates, Example, Mode,
};
pub use optim::{clip_gradients, clip_slice, Adam, AdamConfig};
pub use params::{BiLayer, LstmWeights, ParamSet, Tensor};
pub use train::{corpus_perplexity, decode_example, init_params, train, EpochRecord, FrozenRows, TrainOutcome};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token id {id} is outside a vocabulary of {vocab}")]
    TokenOutOfRange { id: u32, vocab: usize },
    #[error("loss became non-finite ({0})")]
    NonFiniteLoss(f64),
    #[error("gradient contains non-finite values")]
    NonFiniteGradient,
    #[error("training diverged in epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("no training examples")]
    EmptyTrainingSet,
    #[error("pretrained vectors have dimension {found}, model expects {expected}")]
    EmbeddingDimension { expected: usize, found: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    /// Per direction in the encoder; also the decoder and attention width.
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dropout: f64,
    pub code_vocab: usize,
    pub comment_vocab: usize,
    pub max_code_len: usize,
    pub max_comment_len: usize,
    pub beam_width: usize,
    pub length_normalization: bool,
    pub clip_threshold: f64,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Keep pretrained embedding rows fixed during training.
    pub freeze_pretrained: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 32,
            hidden_dim: 32,
            num_layers: 2,
            dropout: 0.2,
            code_vocab: 0,
            comment_vocab: 0,
            max_code_len: crate::corpus::MAX_CODE_LEN,
            max_comment_len: crate::corpus::MAX_COMMENT_LEN,
            beam_width: 5,
            length_normalization: false,
            clip_threshold: 5.0,
            adam: AdamConfig::default(),
            epochs: 50,
            batch_size: 16,
            seed: 0,
            freeze_pretrained: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let counts = [
            ("embedding_dim", self.embedding_dim),
            ("hidden_dim", self.hidden_dim),
            ("num_layers", self.num_layers),
            ("max_code_len", self.max_code_len),
            ("max_comment_len", self.max_comment_len),
            ("beam_width", self.beam_width),
            ("batch_size", self.batch_size),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(ModelError::InvalidConfig(format!("{name} must be at least 1")));
        }
        if self.code_vocab <= crate::corpus::NUM_RESERVED || self.comment_vocab <= crate::corpus::NUM_RESERVED {
            return Err(ModelError::InvalidConfig("vocabularies need at least one non-reserved token".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::InvalidConfig(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.clip_threshold > 0.0) {
            return Err(ModelError::InvalidConfig("clip_threshold must be positive".into()));
        }
        Ok(())
    }
}
