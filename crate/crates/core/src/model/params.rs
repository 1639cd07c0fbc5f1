use rand::Rng;

use super::ModelConfig;

/// Dense row-major matrix of doubles. Vectors are `n x 1` tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Self {
        Self {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.gen_range(-scale..=scale)).collect(),
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    /// `out += self * x`
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o += dot(row, x);
        }
    }

    /// `out += self^T * y`
    pub fn matvec_t_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        for (&yr, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if yr != 0.0 {
                axpy(yr, row, out);
            }
        }
    }

    /// `self += a * b^T`
    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!((a.len(), b.len()), (self.rows, self.cols));
        for (&ar, row) in a.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            if ar != 0.0 {
                axpy(ar, b, row);
            }
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Weights of one LSTM cell: gates `[input, forget, candidate, output]`
/// stacked row-wise, acting on `[x; h_prev]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl LstmWeights {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let scale = 1.0 / ((input + hidden) as f64).sqrt();
        let mut bias = Tensor::zeros(4 * hidden, 1);
        // Forget gate starts open.
        bias.data[hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
        Self {
            weight: Tensor::uniform(4 * hidden, input + hidden, scale, rng),
            bias,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weight: Tensor::zeros(self.weight.rows, self.weight.cols),
            bias: Tensor::zeros(self.bias.rows, 1),
        }
    }

    pub fn hidden(&self) -> usize {
        self.bias.rows / 4
    }

    pub fn input(&self) -> usize {
        self.weight.cols - self.hidden()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLayer {
    pub forward: LstmWeights,
    pub backward: LstmWeights,
}

/// Every trainable tensor of the network. Gradients and Adam moments use the
/// same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// `code_vocab x embedding_dim`
    pub src_embed: Tensor,
    /// `comment_vocab x embedding_dim`
    pub tgt_embed: Tensor,
    pub encoder: Vec<BiLayer>,
    /// Maps `[last forward state; first backward state]` to the initial
    /// decoder state.
    pub bridge_w: Tensor,
    pub bridge_b: Tensor,
    /// Attention: `e_j = v . tanh(W h_j + U s)`.
    pub attn_w: Tensor,
    pub attn_u: Tensor,
    pub attn_v: Tensor,
    /// Decoder cell over `[embedding; context]`.
    pub decoder: LstmWeights,
    pub out_w: Tensor,
    pub out_b: Tensor,
}

impl ParamSet {
    pub fn init<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Self {
        let (e, h) = (config.embedding_dim, config.hidden_dim);
        let encoder = (0..config.num_layers)
            .map(|l| {
                let input = if l == 0 { e } else { 2 * h };
                BiLayer {
                    forward: LstmWeights::new(input, h, rng),
                    backward: LstmWeights::new(input, h, rng),
                }
            })
            .collect();
        let scale = |fan_in: usize| 1.0 / (fan_in as f64).sqrt();
        Self {
            src_embed: Tensor::uniform(config.code_vocab, e, 1.0, rng),
            tgt_embed: Tensor::uniform(config.comment_vocab, e, 1.0, rng),
            encoder,
            bridge_w: Tensor::uniform(h, 2 * h, scale(2 * h), rng),
            bridge_b: Tensor::zeros(h, 1),
            attn_w: Tensor::uniform(h, 2 * h, scale(2 * h), rng),
            attn_u: Tensor::uniform(h, h, scale(h), rng),
            attn_v: Tensor::uniform(h, 1, scale(h), rng),
            decoder: LstmWeights::new(e + 2 * h, h, rng),
            out_w: Tensor::uniform(config.comment_vocab, h, scale(h), rng),
            out_b: Tensor::zeros(config.comment_vocab, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
        z
    }

    /// Stable tensor names, in the order of [`ParamSet::tensors`].
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec!["src_embed".to_string(), "tgt_embed".to_string()];
        for l in 0..self.encoder.len() {
            for dir in ["forward", "backward"] {
                names.push(format!("encoder.{l}.{dir}.weight"));
                names.push(format!("encoder.{l}.{dir}.bias"));
            }
        }
        names.extend(
            ["bridge_w", "bridge_b", "attn_w", "attn_u", "attn_v", "decoder.weight", "decoder.bias", "out_w", "out_b"]
                .map(String::from),
        );
        names
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.src_embed, &self.tgt_embed];
        for layer in &self.encoder {
            out.extend([&layer.forward.weight, &layer.forward.bias, &layer.backward.weight, &layer.backward.bias]);
        }
        out.extend([
            &self.bridge_w,
            &self.bridge_b,
            &self.attn_w,
            &self.attn_u,
            &self.attn_v,
            &self.decoder.weight,
            &self.decoder.bias,
            &self.out_w,
            &self.out_b,
        ]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.src_embed, &mut self.tgt_embed];
        for layer in &mut self.encoder {
            out.extend([
                &mut layer.forward.weight,
                &mut layer.forward.bias,
                &mut layer.backward.weight,
                &mut layer.backward.bias,
            ]);
        }
        out.extend([
            &mut self.bridge_w,
            &mut self.bridge_b,
            &mut self.attn_w,
            &mut self.attn_u,
            &mut self.attn_v,
            &mut self.decoder.weight,
            &mut self.decoder.bias,
            &mut self.out_w,
            &mut self.out_b,
        ]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| &t.data).map(|x| x * x).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            t.data.iter_mut().for_each(|x| *x *= k);
        }
    }

    /// Concatenation of all tensors in visiting order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    pub fn shapes_match(&self, other: &Self) -> bool {
        let shape = |p: &Self| p.tensors().iter().map(|t| (t.rows, t.cols)).collect::<Vec<_>>();
        shape(self) == shape(other)
    }
}
