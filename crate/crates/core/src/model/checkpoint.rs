//! Binary checkpoints: a JSON header followed by little-endian `f64`
//! tensors for the parameters and the Adam moments. See
//! `docs/checkpoint.md` for the byte layout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::Adam;
use super::params::{ParamSet, Tensor};
use super::{ModelConfig, ModelError};
use crate::corpus::Vocabulary;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"EVSUMMCK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Header fields are capped so a corrupt length cannot trigger a huge
/// allocation.
const MAX_HEADER_BYTES: u64 = 1 << 30;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    epoch: usize,
    valid_bleu4: Option<f64>,
    code_vocab: Vec<String>,
    comment_vocab: Vec<String>,
    tensor_names: Vec<String>,
}

/// Everything needed to resume training or to summarize.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: ModelConfig,
    /// Epochs completed; 0 for an untrained model.
    pub epoch: usize,
    pub valid_bleu4: Option<f64>,
    pub code_vocab: Vocabulary,
    pub comment_vocab: Vocabulary,
    pub params: ParamSet,
    pub optimizer: Adam,
}

fn bad(msg: impl Into<String>) -> ModelError {
    ModelError::Checkpoint(msg.into())
}

fn write_tensors(out: &mut impl Write, p: &ParamSet) -> std::io::Result<()> {
    let tensors = p.tensors();
    out.write_all(&(tensors.len() as u32).to_le_bytes())?;
    for t in tensors {
        out.write_all(&(t.rows as u32).to_le_bytes())?;
        out.write_all(&(t.cols as u32).to_le_bytes())?;
        for v in &t.data {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, ModelError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, ModelError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Fills `target` in place; every shape must match the stored one.
fn read_tensors(r: &mut impl Read, target: &mut ParamSet, what: &str) -> Result<(), ModelError> {
    let names = target.tensor_names();
    let mut tensors = target.tensors_mut();
    let n = read_u32(r)? as usize;
    if n != tensors.len() {
        return Err(bad(format!("{what}: {n} tensors stored, model has {}", tensors.len())));
    }
    for (t, name) in tensors.iter_mut().zip(&names) {
        let (rows, cols) = (read_u32(r)? as usize, read_u32(r)? as usize);
        if (rows, cols) != (t.rows, t.cols) {
            return Err(bad(format!(
                "{what}: tensor {name} is {rows}x{cols}, expected {}x{}",
                t.rows, t.cols
            )));
        }
        let mut buf = vec![0u8; rows * cols * 8];
        r.read_exact(&mut buf)?;
        for (dst, chunk) in t.data.iter_mut().zip(buf.chunks_exact(8)) {
            *dst = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        }
    }
    Ok(())
}

fn empty_params(config: &ModelConfig) -> ParamSet {
    let mut p = ParamSet::init(config, &mut ChaCha8Rng::seed_from_u64(0));
    p.tensors_mut().into_iter().for_each(|t: &mut Tensor| t.fill(0.0));
    p
}

impl Checkpoint {
    pub fn write_to(&self, out: &mut impl Write) -> Result<(), ModelError> {
        let header = Header {
            config: self.config.clone(),
            epoch: self.epoch,
            valid_bleu4: self.valid_bleu4,
            code_vocab: self.code_vocab.tokens().to_vec(),
            comment_vocab: self.comment_vocab.tokens().to_vec(),
            tensor_names: self.params.tensor_names(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| bad(e.to_string()))?;
        out.write_all(CHECKPOINT_MAGIC)?;
        out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        out.write_all(&(json.len() as u64).to_le_bytes())?;
        out.write_all(&json)?;
        write_tensors(out, &self.params)?;
        out.write_all(&self.optimizer.step.to_le_bytes())?;
        write_tensors(out, &self.optimizer.first_moment)?;
        write_tensors(out, &self.optimizer.second_moment)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, ModelError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(bad("not a checkpoint file (bad magic)"));
        }
        let version = read_u32(r)?;
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let header_len = read_u64(r)?;
        if header_len > MAX_HEADER_BYTES {
            return Err(bad(format!("header length {header_len} is implausible")));
        }
        let mut json = vec![0u8; header_len as usize];
        r.read_exact(&mut json)?;
        let header: Header = serde_json::from_slice(&json).map_err(|e| bad(format!("header: {e}")))?;
        header.config.validate()?;
        let vocab = |tokens: Vec<String>, expected: usize, what: &str| -> Result<Vocabulary, ModelError> {
            let v = Vocabulary::from_tokens(tokens).map_err(|e| bad(format!("{what} vocabulary: {e}")))?;
            if v.len() != expected {
                return Err(bad(format!("{what} vocabulary has {} tokens, config says {expected}", v.len())));
            }
            Ok(v)
        };
        let code_vocab = vocab(header.code_vocab, header.config.code_vocab, "code")?;
        let comment_vocab = vocab(header.comment_vocab, header.config.comment_vocab, "comment")?;
        let mut params = empty_params(&header.config);
        if params.tensor_names() != header.tensor_names {
            return Err(bad("tensor names do not match the configured architecture"));
        }
        read_tensors(r, &mut params, "parameters")?;
        let mut optimizer = Adam::new(header.config.adam, &params);
        optimizer.step = read_u64(r)?;
        read_tensors(r, &mut optimizer.first_moment, "first moment")?;
        read_tensors(r, &mut optimizer.second_moment, "second moment")?;
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(bad("trailing bytes after checkpoint"));
        }
        Ok(Self {
            config: header.config,
            epoch: header.epoch,
            valid_bleu4: header.valid_bleu4,
            code_vocab,
            comment_vocab,
            params,
            optimizer,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}
