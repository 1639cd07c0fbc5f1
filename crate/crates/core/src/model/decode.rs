//! Greedy and beam-search decoding over any step-wise model.

use std::cmp::Ordering;

use super::network::{decode_step, initial_state, log_softmax, DecoderState, EncoderStates, Mode};
use super::params::ParamSet;
use super::ModelConfig;
use crate::corpus::{EOS_ID, PAD_ID, SOS_ID};

/// A conditional next-token distribution.
pub trait StepModel {
    type State: Clone;

    fn start(&self) -> Self::State;

    /// Log-probabilities over the output vocabulary and the next state.
    fn step(&self, prev_token: u32, state: &Self::State) -> (Vec<f64>, Self::State);
}

/// The trained decoder conditioned on one encoded source.
pub struct Seq2SeqStep<'a> {
    pub params: &'a ParamSet,
    pub config: &'a ModelConfig,
    pub encoded: &'a EncoderStates,
}

impl StepModel for Seq2SeqStep<'_> {
    type State = DecoderState;

    fn start(&self) -> DecoderState {
        initial_state(self.params, self.encoded)
    }

    fn step(&self, prev_token: u32, state: &DecoderState) -> (Vec<f64>, DecoderState) {
        let (logits, next) = decode_step(prev_token, state, self.encoded, self.params, self.config, &mut Mode::Infer);
        (log_softmax(&logits), next)
    }
}

/// Tokens the decoder may emit: everything but padding and SOS.
fn emittable(id: usize) -> bool {
    id != PAD_ID as usize && id != SOS_ID as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    /// Emitted tokens without the final EOS.
    pub tokens: Vec<u32>,
    /// Summed log-probability, including the EOS step when finished.
    pub score: f64,
    pub finished: bool,
}

/// Picks the most probable emittable token at each step, lowest id on ties,
/// for at most `max_steps` steps (EOS included).
pub fn greedy_decode<M: StepModel>(model: &M, max_steps: usize) -> Decoded {
    let mut state = model.start();
    let mut prev = SOS_ID;
    let mut tokens = Vec::new();
    let mut score = 0.0;
    for _ in 0..max_steps {
        let (logp, next) = model.step(prev, &state);
        let mut best: Option<usize> = None;
        for (id, &lp) in logp.iter().enumerate() {
            if emittable(id) && best.is_none_or(|b| lp > logp[b]) {
                best = Some(id);
            }
        }
        let Some(tok) = best else { break };
        score += logp[tok];
        if tok == EOS_ID as usize {
            return Decoded {
                tokens,
                score,
                finished: true,
            };
        }
        tokens.push(tok as u32);
        prev = tok as u32;
        state = next;
    }
    Decoded {
        tokens,
        score,
        finished: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub width: usize,
    /// Decoder steps, EOS included.
    pub max_steps: usize,
    /// Compare finished hypotheses by score per emitted token.
    pub length_normalization: bool,
}

#[derive(Debug, Clone)]
pub struct BeamHypothesis<S> {
    pub tokens: Vec<u32>,
    pub log_prob: f64,
    pub state: S,
    pub finished: bool,
}

impl<S> BeamHypothesis<S> {
    fn rank_score(&self, normalize: bool) -> f64 {
        if normalize {
            // EOS counts as an emitted step.
            let steps = self.tokens.len() + usize::from(self.finished);
            self.log_prob / steps.max(1) as f64
        } else {
            self.log_prob
        }
    }
}

/// Keeps the `width` best partial hypotheses per step. A hypothesis that
/// emits EOS leaves the beam; decoding stops when the beam is empty, when
/// no live hypothesis can still beat the best finished one, or after
/// `max_steps`. Returns the best finished hypothesis, or the best live one
/// if none finished.
pub fn beam_decode<M: StepModel>(model: &M, config: &BeamConfig) -> Decoded {
    assert!(config.width >= 1, "beam width must be positive");
    let mut alive = vec![BeamHypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: model.start(),
        finished: false,
    }];
    let mut finished: Vec<BeamHypothesis<M::State>> = Vec::new();
    for _ in 0..config.max_steps {
        let mut expansions = Vec::with_capacity(alive.len());
        let mut candidates = Vec::new();
        for (h_idx, hyp) in alive.iter().enumerate() {
            let prev = hyp.tokens.last().copied().unwrap_or(SOS_ID);
            let (logp, next) = model.step(prev, &hyp.state);
            for (tok, lp) in logp.iter().enumerate().filter(|(id, _)| emittable(*id)) {
                candidates.push((hyp.log_prob + lp, h_idx, tok as u32));
            }
            expansions.push(next);
        }
        // Stable: equal scores keep hypothesis order, then token order.
        candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        candidates.truncate(config.width);
        let mut next_alive = Vec::with_capacity(candidates.len());
        for (score, h_idx, tok) in candidates {
            let mut tokens = alive[h_idx].tokens.clone();
            let done = tok == EOS_ID;
            if !done {
                tokens.push(tok);
            }
            let hyp = BeamHypothesis {
                tokens,
                log_prob: score,
                state: expansions[h_idx].clone(),
                finished: done,
            };
            if done {
                finished.push(hyp);
            } else {
                next_alive.push(hyp);
            }
        }
        alive = next_alive;
        if alive.is_empty() {
            break;
        }
        if !config.length_normalization {
            let best_done = finished.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
            let best_alive = alive.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
            if best_done >= best_alive {
                break;
            }
        }
    }
    let pool = if finished.is_empty() { &alive } else { &finished };
    let best = pool
        .iter()
        .reduce(|a, b| {
            if b.rank_score(config.length_normalization) > a.rank_score(config.length_normalization) {
                b
            } else {
                a
            }
        })
        .expect("beam keeps at least one hypothesis");
    Decoded {
        tokens: best.tokens.clone(),
        score: best.log_prob,
        finished: best.finished,
    }
}

/// Summed log-probability of emitting `tokens`, followed by EOS when
/// `finished`.
pub fn sequence_score<M: StepModel>(model: &M, tokens: &[u32], finished: bool) -> f64 {
    let mut state = model.start();
    let mut prev = SOS_ID;
    let mut score = 0.0;
    let eos = finished.then_some(EOS_ID);
    for tok in tokens.iter().copied().chain(eos) {
        let (logp, next) = model.step(prev, &state);
        score += logp[tok as usize];
        prev = tok;
        state = next;
    }
    score
}
