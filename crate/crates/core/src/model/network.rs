//! Forward and backward passes of the encoder, attention and decoder.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{axpy, dot, BiLayer, LstmWeights, ParamSet};
use super::{ModelConfig, ModelError};
use crate::corpus::{EOS_ID, PAD_ID, SOS_ID};

/// Training mode draws dropout masks from the given generator; inference
/// mode applies no dropout.
pub enum Mode<'r> {
    Infer,
    Train(&'r mut ChaCha8Rng),
}

impl Mode<'_> {
    /// Inverted-dropout mask of length `n`, or `None` when nothing is dropped.
    fn mask(&mut self, rate: f64, n: usize) -> Option<Vec<f64>> {
        match self {
            Mode::Train(rng) if rate > 0.0 => {
                let keep = 1.0 / (1.0 - rate);
                Some((0..n).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect())
            }
            _ => None,
        }
    }
}

fn apply_mask(x: &mut [f64], mask: &Option<Vec<f64>>) {
    if let Some(m) = mask {
        x.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - log_z).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Everything one LSTM step needs for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct LstmStep {
    xh: Vec<f64>,
    gates: [Vec<f64>; 4],
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
    pub(crate) c: Vec<f64>,
    pub(crate) h: Vec<f64>,
}

pub(crate) fn lstm_forward(w: &LstmWeights, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmStep {
    let hid = w.hidden();
    let mut xh = Vec::with_capacity(x.len() + hid);
    xh.extend_from_slice(x);
    xh.extend_from_slice(h_prev);
    let mut z = w.bias.data.clone();
    w.weight.matvec_acc(&xh, &mut z);
    let gate = |k: usize, f: fn(f64) -> f64| z[k * hid..(k + 1) * hid].iter().map(|&v| f(v)).collect::<Vec<_>>();
    let gates = [gate(0, sigmoid), gate(1, sigmoid), gate(2, f64::tanh), gate(3, sigmoid)];
    let c: Vec<f64> = (0..hid).map(|k| gates[1][k] * c_prev[k] + gates[0][k] * gates[2][k]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h = (0..hid).map(|k| gates[3][k] * tanh_c[k]).collect();
    LstmStep {
        xh,
        gates,
        c_prev: c_prev.to_vec(),
        tanh_c,
        c,
        h,
    }
}

/// Backpropagates through one step; returns `(dx, dh_prev, dc_prev)`.
pub(crate) fn lstm_backward(
    w: &LstmWeights,
    step: &LstmStep,
    dh: &[f64],
    dc_next: &[f64],
    grad: &mut LstmWeights,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hid = w.hidden();
    let [i, f, g, o] = &step.gates;
    let mut dz = vec![0.0; 4 * hid];
    let mut dc_prev = vec![0.0; hid];
    for k in 0..hid {
        let tc = step.tanh_c[k];
        let dc = dc_next[k] + dh[k] * o[k] * (1.0 - tc * tc);
        dz[k] = dc * g[k] * i[k] * (1.0 - i[k]);
        dz[hid + k] = dc * step.c_prev[k] * f[k] * (1.0 - f[k]);
        dz[2 * hid + k] = dc * i[k] * (1.0 - g[k] * g[k]);
        dz[3 * hid + k] = dh[k] * tc * o[k] * (1.0 - o[k]);
        dc_prev[k] = dc * f[k];
    }
    grad.weight.add_outer(&dz, &step.xh);
    axpy(1.0, &dz, &mut grad.bias.data);
    let mut dxh = vec![0.0; step.xh.len()];
    w.weight.matvec_t_acc(&dz, &mut dxh);
    let dh_prev = dxh.split_off(step.xh.len() - hid);
    (dxh, dh_prev, dc_prev)
}

/// Top-layer encoder states `[forward; backward]`, one column per unpadded
/// source position, with their attention keys `W h_j` precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderStates {
    pub columns: Vec<Vec<f64>>,
    pub keys: Vec<Vec<f64>>,
}

impl EncoderStates {
    pub fn new(columns: Vec<Vec<f64>>, params: &ParamSet) -> Self {
        let keys = columns.iter().map(|h| params.attn_w.matvec(h)).collect();
        Self { columns, keys }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Number of leading non-padding ids.
pub fn source_len(ids: &[u32]) -> usize {
    ids.iter().position(|&id| id == PAD_ID).unwrap_or(ids.len())
}

struct LayerCache {
    forward: Vec<LstmStep>,
    /// Indexed by source position, computed right to left.
    backward: Vec<LstmStep>,
    input_mask: Vec<Option<Vec<f64>>>,
}

pub(crate) struct EncoderCache {
    tokens: Vec<u32>,
    layers: Vec<LayerCache>,
}

pub(crate) fn encode_cached(
    params: &ParamSet,
    config: &ModelConfig,
    code_ids: &[u32],
    mode: &mut Mode,
) -> Result<(EncoderStates, EncoderCache), ModelError> {
    let tokens = &code_ids[..source_len(code_ids)];
    if let Some(&bad) = tokens.iter().find(|&&id| id as usize >= params.src_embed.rows) {
        return Err(ModelError::TokenOutOfRange {
            id: bad,
            vocab: params.src_embed.rows,
        });
    }
    let t_len = tokens.len();
    let mut inputs: Vec<Vec<f64>> = tokens.iter().map(|&id| params.src_embed.row(id as usize).to_vec()).collect();
    let mut layers = Vec::with_capacity(params.encoder.len());
    for (l, layer) in params.encoder.iter().enumerate() {
        let hid = layer.forward.hidden();
        let mut input_mask = Vec::with_capacity(t_len);
        for x in inputs.iter_mut() {
            let mask = if l > 0 { mode.mask(config.dropout, x.len()) } else { None };
            apply_mask(x, &mask);
            input_mask.push(mask);
        }
        let zero = vec![0.0; hid];
        let mut forward: Vec<LstmStep> = Vec::with_capacity(t_len);
        for x in &inputs {
            let (h, c) = forward.last().map_or((&zero, &zero), |s| (&s.h, &s.c));
            let step = lstm_forward(&layer.forward, x, h, c);
            forward.push(step);
        }
        let mut backward_rev: Vec<LstmStep> = Vec::with_capacity(t_len);
        for x in inputs.iter().rev() {
            let (h, c) = backward_rev.last().map_or((&zero, &zero), |s| (&s.h, &s.c));
            let step = lstm_forward(&layer.backward, x, h, c);
            backward_rev.push(step);
        }
        backward_rev.reverse();
        inputs = forward
            .iter()
            .zip(&backward_rev)
            .map(|(f, b)| f.h.iter().chain(&b.h).copied().collect())
            .collect();
        layers.push(LayerCache {
            forward,
            backward: backward_rev,
            input_mask,
        });
    }
    let cache = EncoderCache {
        tokens: tokens.to_vec(),
        layers,
    };
    Ok((EncoderStates::new(inputs, params), cache))
}

/// Runs the stacked bidirectional encoder over the unpadded prefix of
/// `code_ids`.
pub fn encode(params: &ParamSet, config: &ModelConfig, code_ids: &[u32], mode: &mut Mode) -> Result<EncoderStates, ModelError> {
    encode_cached(params, config, code_ids, mode).map(|(states, _)| states)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

fn bridge_input(enc: &EncoderStates, hid: usize) -> Vec<f64> {
    match (enc.columns.last(), enc.columns.first()) {
        (Some(last), Some(first)) => last[..hid].iter().chain(&first[hid..]).copied().collect(),
        _ => vec![0.0; 2 * hid],
    }
}

/// `s_0 = tanh(B [h_fwd_last; h_bwd_first] + b)`, `c_0 = 0`.
pub fn initial_state(params: &ParamSet, enc: &EncoderStates) -> DecoderState {
    let hid = params.decoder.hidden();
    let z = bridge_input(enc, hid);
    let mut pre = params.bridge_b.data.clone();
    params.bridge_w.matvec_acc(&z, &mut pre);
    DecoderState {
        h: pre.into_iter().map(f64::tanh).collect(),
        c: vec![0.0; hid],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
    /// `tanh(W h_j + U s)` per source position.
    activations: Vec<Vec<f64>>,
}

/// Additive attention: `e_j = v . tanh(W h_j + U s_prev)`, softmax over `j`,
/// context `sum_j alpha_j h_j`. An empty source yields a zero context.
pub fn attention(s_prev: &[f64], enc: &EncoderStates, params: &ParamSet) -> Attention {
    let query = params.attn_u.matvec(s_prev);
    let activations: Vec<Vec<f64>> = enc
        .keys
        .iter()
        .map(|k| k.iter().zip(&query).map(|(a, b)| (a + b).tanh()).collect())
        .collect();
    let scores: Vec<f64> = activations.iter().map(|a| dot(a, &params.attn_v.data)).collect();
    let weights = softmax(&scores);
    let mut context = vec![0.0; params.attn_w.cols];
    for (alpha, h) in weights.iter().zip(&enc.columns) {
        axpy(*alpha, h, &mut context);
    }
    Attention {
        weights,
        context,
        activations,
    }
}

pub(crate) struct StepCache {
    token: u32,
    s_prev: Vec<f64>,
    attention: Attention,
    input_mask: Option<Vec<f64>>,
    lstm: LstmStep,
}

pub(crate) fn decode_step_cached(
    prev_token: u32,
    state: &DecoderState,
    enc: &EncoderStates,
    params: &ParamSet,
    config: &ModelConfig,
    mode: &mut Mode,
) -> (Vec<f64>, DecoderState, StepCache) {
    let attn = attention(&state.h, enc, params);
    let mut x: Vec<f64> = params.tgt_embed.row(prev_token as usize).iter().chain(&attn.context).copied().collect();
    let input_mask = mode.mask(config.dropout, x.len());
    apply_mask(&mut x, &input_mask);
    let lstm = lstm_forward(&params.decoder, &x, &state.h, &state.c);
    let mut logits = params.out_b.data.clone();
    params.out_w.matvec_acc(&lstm.h, &mut logits);
    let next = DecoderState {
        h: lstm.h.clone(),
        c: lstm.c.clone(),
    };
    let cache = StepCache {
        token: prev_token,
        s_prev: state.h.clone(),
        attention: attn,
        input_mask,
        lstm,
    };
    (logits, next, cache)
}

/// One decoder step: attend with the previous state, feed
/// `[embedding(prev_token); context]` to the cell, project to logits.
pub fn decode_step(
    prev_token: u32,
    state: &DecoderState,
    enc: &EncoderStates,
    params: &ParamSet,
    config: &ModelConfig,
    mode: &mut Mode,
) -> (Vec<f64>, DecoderState) {
    let (logits, next, _) = decode_step_cached(prev_token, state, enc, params, config, mode);
    (logits, next)
}

/// A training example: source ids (padding allowed) and target comment ids
/// without delimiters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub source: Vec<u32>,
    pub target: Vec<u32>,
}

impl Example {
    /// Builds from a padded code array and a `SOS ... EOS` padded comment
    /// array.
    pub fn from_ids(code_ids: &[u32], comment_ids: &[u32]) -> Self {
        let body = comment_ids.strip_prefix(&[SOS_ID]).unwrap_or(comment_ids);
        let end = body.iter().position(|&id| id == EOS_ID || id == PAD_ID).unwrap_or(body.len());
        Self {
            source: code_ids[..source_len(code_ids)].to_vec(),
            target: body[..end].to_vec(),
        }
    }
}

pub(crate) struct ForwardCache {
    encoder: EncoderCache,
    states: EncoderStates,
    init: DecoderState,
    steps: Vec<StepCache>,
    probs: Vec<Vec<f64>>,
    targets: Vec<u32>,
}

/// Teacher-forced forward pass; returns the summed negative log-likelihood
/// of `target` followed by EOS.
pub(crate) fn forward_example(
    params: &ParamSet,
    config: &ModelConfig,
    example: &Example,
    mode: &mut Mode,
) -> Result<(f64, ForwardCache), ModelError> {
    let vocab = params.tgt_embed.rows;
    if let Some(&bad) = example.target.iter().find(|&&id| id as usize >= vocab) {
        return Err(ModelError::TokenOutOfRange { id: bad, vocab });
    }
    let (states, encoder) = encode_cached(params, config, &example.source, mode)?;
    let init = initial_state(params, &states);
    let inputs = std::iter::once(SOS_ID).chain(example.target.iter().copied());
    let targets: Vec<u32> = example.target.iter().copied().chain(std::iter::once(EOS_ID)).collect();
    let mut state = init.clone();
    let mut loss = 0.0;
    let mut steps = Vec::with_capacity(targets.len());
    let mut probs = Vec::with_capacity(targets.len());
    for (input, &target) in inputs.zip(&targets) {
        let (logits, next, cache) = decode_step_cached(input, &state, &states, params, config, mode);
        let logp = log_softmax(&logits);
        loss -= logp[target as usize];
        probs.push(logp.into_iter().map(f64::exp).collect());
        steps.push(cache);
        state = next;
    }
    Ok((
        loss,
        ForwardCache {
            encoder,
            states,
            init,
            steps,
            probs,
            targets,
        },
    ))
}

/// Accumulates `scale * dL/dparams` for one example into `grad`.
pub(crate) fn backward_example(params: &ParamSet, cache: &ForwardCache, scale: f64, grad: &mut ParamSet) {
    let hid = params.decoder.hidden();
    let emb_dim = params.tgt_embed.cols;
    let t_src = cache.states.len();
    let mut d_columns = vec![vec![0.0; 2 * hid]; t_src];
    let mut dh_next = vec![0.0; hid];
    let mut dc_next = vec![0.0; hid];

    for (t, step) in cache.steps.iter().enumerate().rev() {
        let mut dlogits = cache.probs[t].clone();
        dlogits[cache.targets[t] as usize] -= 1.0;
        dlogits.iter_mut().for_each(|v| *v *= scale);
        grad.out_w.add_outer(&dlogits, &step.lstm.h);
        axpy(1.0, &dlogits, &mut grad.out_b.data);
        let mut dh = dh_next;
        params.out_w.matvec_t_acc(&dlogits, &mut dh);

        let (mut dx, mut dh_prev, dc_prev) = lstm_backward(&params.decoder, &step.lstm, &dh, &dc_next, &mut grad.decoder);
        apply_mask(&mut dx, &step.input_mask);
        let d_ctx = dx.split_off(emb_dim);
        axpy(1.0, &dx, grad.tgt_embed.row_mut(step.token as usize));

        let attn = &step.attention;
        if t_src > 0 {
            let d_alpha: Vec<f64> = cache.states.columns.iter().map(|h| dot(&d_ctx, h)).collect();
            let mean = dot(&attn.weights, &d_alpha);
            let mut d_query = vec![0.0; hid];
            for j in 0..t_src {
                axpy(attn.weights[j], &d_ctx, &mut d_columns[j]);
                let d_score = attn.weights[j] * (d_alpha[j] - mean);
                let a = &attn.activations[j];
                axpy(d_score, a, &mut grad.attn_v.data);
                let d_pre: Vec<f64> = a
                    .iter()
                    .zip(&params.attn_v.data)
                    .map(|(ak, vk)| d_score * vk * (1.0 - ak * ak))
                    .collect();
                grad.attn_w.add_outer(&d_pre, &cache.states.columns[j]);
                params.attn_w.matvec_t_acc(&d_pre, &mut d_columns[j]);
                axpy(1.0, &d_pre, &mut d_query);
            }
            grad.attn_u.add_outer(&d_query, &step.s_prev);
            params.attn_u.matvec_t_acc(&d_query, &mut dh_prev);
        }
        dh_next = dh_prev;
        dc_next = dc_prev;
    }

    // Bridge from the encoder to the initial decoder state.
    let z = bridge_input(&cache.states, hid);
    let d_pre: Vec<f64> = dh_next.iter().zip(&cache.init.h).map(|(d, s)| d * (1.0 - s * s)).collect();
    grad.bridge_w.add_outer(&d_pre, &z);
    axpy(1.0, &d_pre, &mut grad.bridge_b.data);
    if t_src > 0 {
        let mut dz = vec![0.0; 2 * hid];
        params.bridge_w.matvec_t_acc(&d_pre, &mut dz);
        axpy(1.0, &dz[..hid], &mut d_columns[t_src - 1][..hid]);
        axpy(1.0, &dz[hid..], &mut d_columns[0][hid..]);
    }

    let mut d_out = d_columns;
    for (l, layer) in params.encoder.iter().enumerate().rev() {
        let lc = &cache.encoder.layers[l];
        let enc_hid = layer.forward.hidden();
        let mut d_in = vec![vec![0.0; layer.forward.input()]; t_src];
        let BiLayer {
            forward: g_fwd,
            backward: g_bwd,
        } = &mut grad.encoder[l];

        let mut dh_next = vec![0.0; enc_hid];
        let mut dc_next = vec![0.0; enc_hid];
        for t in (0..t_src).rev() {
            let mut dh = d_out[t][..enc_hid].to_vec();
            axpy(1.0, &dh_next, &mut dh);
            let (dx, dhp, dcp) = lstm_backward(&layer.forward, &lc.forward[t], &dh, &dc_next, g_fwd);
            axpy(1.0, &dx, &mut d_in[t]);
            dh_next = dhp;
            dc_next = dcp;
        }
        let mut dh_next = vec![0.0; enc_hid];
        let mut dc_next = vec![0.0; enc_hid];
        for t in 0..t_src {
            let mut dh = d_out[t][enc_hid..].to_vec();
            axpy(1.0, &dh_next, &mut dh);
            let (dx, dhp, dcp) = lstm_backward(&layer.backward, &lc.backward[t], &dh, &dc_next, g_bwd);
            axpy(1.0, &dx, &mut d_in[t]);
            dh_next = dhp;
            dc_next = dcp;
        }
        for (d, mask) in d_in.iter_mut().zip(&lc.input_mask) {
            apply_mask(d, mask);
        }
        d_out = d_in;
    }
    for (t, &id) in cache.encoder.tokens.iter().enumerate() {
        axpy(1.0, &d_out[t], grad.src_embed.row_mut(id as usize));
    }
}

/// Summed loss and target token count (EOS included) over `batch`.
pub fn loss(params: &ParamSet, config: &ModelConfig, batch: &[Example], mode: &mut Mode) -> Result<(f64, usize), ModelError> {
    let mut total = 0.0;
    let mut count = 0;
    for ex in batch {
        let (l, cache) = forward_example(params, config, ex, mode)?;
        total += l;
        count += cache.targets.len();
    }
    Ok((total, count))
}

/// Loss, token count and exact gradients of the summed loss over `batch`.
pub fn loss_and_gradients(
    params: &ParamSet,
    config: &ModelConfig,
    batch: &[Example],
    mode: &mut Mode,
) -> Result<(f64, usize, ParamSet), ModelError> {
    let mut grad = params.zeros_like();
    let mut total = 0.0;
    let mut count = 0;
    for ex in batch {
        let (l, cache) = forward_example(params, config, ex, mode)?;
        backward_example(params, &cache, 1.0, &mut grad);
        total += l;
        count += cache.targets.len();
    }
    if !total.is_finite() {
        return Err(ModelError::NonFiniteLoss(total));
    }
    if !grad.all_finite() {
        return Err(ModelError::NonFiniteGradient);
    }
    Ok((total, count, grad))
}
