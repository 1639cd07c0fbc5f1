//! Comment/code pair filtering, vocabulary construction, id encoding and
//! dataset splitting.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::{tokenize, Origin, TokenSequence};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const SOS_ID: u32 = 2;
pub const EOS_ID: u32 = 3;
pub const NUM_RESERVED: usize = 4;
pub const RESERVED_TOKENS: [&str; NUM_RESERVED] = ["<pad>", "<unk>", "<sos>", "<eos>"];

pub const MAX_COMMENT_LEN: usize = 35;
pub const MAX_CODE_LEN: usize = 100;
pub const MIN_COMMENT_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("sequence of {len} tokens does not fit in {max_len} slots")]
    SequenceTooLong { len: usize, max_len: usize },
    #[error("need at least 3 pairs to split, got {0}")]
    TooFewPairs(usize),
    #[error("split ratios must be nonnegative and sum to 1, got {0:?}")]
    BadRatios((f64, f64, f64)),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("vocabulary file {path}: {message}")]
    BadVocabFile { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One raw line of a pairs file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPair {
    pub id: String,
    pub code: String,
    pub comment: String,
}

/// One line of a preprocessed file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedPair {
    pub id: String,
    pub code_tokens: Vec<String>,
    pub comment_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    TooShortComment,
    TooLongComment,
    TooLongCode,
    EmptyCode,
    NonEnglish,
    AutoGenerated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterDecision {
    Keep {
        code: TokenSequence,
        comment: TokenSequence,
    },
    Drop(DropReason),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_comment: usize,
    pub max_comment: usize,
    pub max_code: usize,
    /// Minimum share of ASCII characters among the comment's alphabetic ones.
    pub min_ascii_ratio: f64,
    /// Case-insensitive substrings marking generator boilerplate.
    pub generated_markers: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_comment: MIN_COMMENT_LEN,
            max_comment: MAX_COMMENT_LEN,
            max_code: MAX_CODE_LEN,
            min_ascii_ratio: 0.9,
            generated_markers: vec![
                "auto-generated".into(),
                "generated by".into(),
                "@generated".into(),
            ],
        }
    }
}

fn ascii_alpha_ratio(text: &str) -> f64 {
    let (ascii, total) = text
        .chars()
        .filter(|c| c.is_alphabetic())
        .fold((0usize, 0usize), |(a, t), c| (a + c.is_ascii() as usize, t + 1));
    if total == 0 {
        1.0
    } else {
        ascii as f64 / total as f64
    }
}

/// Decides whether a raw pair enters the training corpus. Length limits
/// apply to tokenized lengths and are inclusive.
pub fn filter_pair(raw_comment: &str, raw_code: &str, config: &FilterConfig) -> FilterDecision {
    let lowered = raw_comment.to_lowercase();
    if config.generated_markers.iter().any(|m| lowered.contains(&m.to_lowercase())) {
        return FilterDecision::Drop(DropReason::AutoGenerated);
    }
    if ascii_alpha_ratio(raw_comment) < config.min_ascii_ratio {
        return FilterDecision::Drop(DropReason::NonEnglish);
    }
    let comment = tokenize(raw_comment, Origin::Comment);
    if comment.len() < config.min_comment {
        return FilterDecision::Drop(DropReason::TooShortComment);
    }
    if comment.len() > config.max_comment {
        return FilterDecision::Drop(DropReason::TooLongComment);
    }
    let code = tokenize(raw_code, Origin::Code);
    if code.is_empty() {
        return FilterDecision::Drop(DropReason::EmptyCode);
    }
    if code.len() > config.max_code {
        return FilterDecision::Drop(DropReason::TooLongCode);
    }
    FilterDecision::Keep { code, comment }
}

/// Token-to-id mapping with the four reserved ids in front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds from an id-ordered token list whose first four entries are the
    /// reserved literals.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        let bad = |message: String| CorpusError::BadVocabFile {
            path: "<memory>".into(),
            message,
        };
        if tokens.len() < NUM_RESERVED
            || tokens.iter().zip(RESERVED_TOKENS).any(|(t, r)| t != r)
        {
            return Err(bad("first four entries must be <pad> <unk> <sos> <eos>".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (id, tok) in tokens.iter().enumerate().skip(NUM_RESERVED) {
            if index.insert(tok.clone(), id as u32).is_some() {
                return Err(bad(format!("duplicate token {tok:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() == NUM_RESERVED
    }

    /// Id of a corpus token, `UNK_ID` when unknown. Reserved literals are
    /// not corpus tokens and also map to `UNK_ID`.
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Maps ids back to tokens, skipping padding and delimiters.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .filter(|&&id| id != PAD_ID && id != SOS_ID && id != EOS_ID)
            .map(|&id| self.token(id).unwrap_or(RESERVED_TOKENS[UNK_ID as usize]).to_string())
            .collect()
    }

    /// One token per line, line `k` (0-based) holding id `k`.
    pub fn write(&self, path: &Path) -> Result<(), CorpusError> {
        let mut out = BufWriter::new(File::create(path)?);
        for tok in &self.tokens {
            writeln!(out, "{tok}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CorpusError> {
        let reader = BufReader::new(File::open(path)?);
        let tokens = reader.lines().collect::<Result<Vec<_>, _>>()?;
        Self::from_tokens(tokens).map_err(|e| match e {
            CorpusError::BadVocabFile { message, .. } => CorpusError::BadVocabFile {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }
}

/// Builds a vocabulary ordered by descending frequency, ties broken
/// lexicographically. Tokens below `min_freq` or past `max_size` (counting
/// only corpus tokens) are left out and encode to `UNK_ID`.
pub fn build_vocab<'a, I>(sequences: I, max_size: Option<usize>, min_freq: usize) -> Result<Vocabulary, CorpusError>
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut seen_any = false;
    for seq in sequences {
        seen_any = true;
        for tok in seq {
            *counts.entry(tok.as_str()).or_default() += 1;
        }
    }
    if !seen_any || counts.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut ranked: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(t, c)| *c >= min_freq.max(1) && !RESERVED_TOKENS.contains(t))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if let Some(max) = max_size {
        ranked.truncate(max);
    }
    let tokens = RESERVED_TOKENS
        .iter()
        .map(|s| s.to_string())
        .chain(ranked.into_iter().map(|(t, _)| t.to_string()))
        .collect();
    Vocabulary::from_tokens(tokens)
}

/// Maps tokens to ids, optionally wrapping them in SOS/EOS, and right-pads
/// with `PAD_ID` to `max_len`.
pub fn encode(tokens: &[String], vocab: &Vocabulary, max_len: usize, add_delimiters: bool) -> Result<Vec<u32>, CorpusError> {
    let needed = tokens.len() + if add_delimiters { 2 } else { 0 };
    if needed > max_len {
        return Err(CorpusError::SequenceTooLong {
            len: needed,
            max_len,
        });
    }
    let mut ids = Vec::with_capacity(max_len);
    if add_delimiters {
        ids.push(SOS_ID);
    }
    ids.extend(tokens.iter().map(|t| vocab.id(t)));
    if add_delimiters {
        ids.push(EOS_ID);
    }
    ids.resize(max_len, PAD_ID);
    Ok(ids)
}

/// A filtered pair with its id-encoded arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRecord {
    pub id: String,
    pub code_tokens: TokenSequence,
    pub comment_tokens: TokenSequence,
    /// Length `MAX_CODE_LEN`, zero padded.
    pub code_ids: Vec<u32>,
    /// `SOS comment EOS`, zero padded to `MAX_COMMENT_LEN + 2`.
    pub comment_ids: Vec<u32>,
}

impl PairRecord {
    pub fn encode(pair: &TokenizedPair, code_vocab: &Vocabulary, comment_vocab: &Vocabulary) -> Result<Self, CorpusError> {
        Ok(Self {
            id: pair.id.clone(),
            code_ids: encode(&pair.code_tokens, code_vocab, MAX_CODE_LEN, false)?,
            comment_ids: encode(&pair.comment_tokens, comment_vocab, MAX_COMMENT_LEN + 2, true)?,
            code_tokens: TokenSequence::new(pair.code_tokens.clone(), Origin::Code),
            comment_tokens: TokenSequence::new(pair.comment_tokens.clone(), Origin::Comment),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

/// Seeded shuffle, then the first `floor(r0 * n)` ids go to train, the next
/// `floor(r1 * n)` to valid and the remainder to test.
pub fn split_dataset(ids: &[String], ratios: (f64, f64, f64), seed: u64) -> Result<SplitAssignment, CorpusError> {
    let (a, b, c) = ratios;
    if a < 0.0 || b < 0.0 || c < 0.0 || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadRatios(ratios));
    }
    let n = ids.len();
    if n < 3 {
        return Err(CorpusError::TooFewPairs(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((a * n as f64) + 1e-9).floor() as usize;
    let n_valid = (((b * n as f64) + 1e-9).floor() as usize).min(n - n_train);
    let pick = |range: std::ops::Range<usize>| order[range].iter().map(|&i| ids[i].clone()).collect();
    Ok(SplitAssignment {
        train: pick(0..n_train),
        valid: pick(n_train..n_train + n_valid),
        test: pick(n_train + n_valid..n),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub mean: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub unique_tokens: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub comment: LengthStats,
    pub code: LengthStats,
}

fn median(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Mean and quartiles using the exclusive median-of-halves convention. A
/// single value is its own Q1 and Q3.
pub fn quartiles(lengths: &[usize]) -> (f64, f64, f64, f64) {
    assert!(!lengths.is_empty(), "quartiles of an empty sample");
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mean = sorted.iter().sum::<usize>() as f64 / n as f64;
    let q2 = median(&sorted);
    if n == 1 {
        return (mean, q2, q2, q2);
    }
    let lower = &sorted[..n / 2];
    let upper = &sorted[(n + 1) / 2..];
    (mean, median(lower), q2, median(upper))
}

fn length_stats<'a>(seqs: impl Iterator<Item = &'a [String]> + Clone) -> LengthStats {
    let lengths: Vec<usize> = seqs.clone().map(|s| s.len()).collect();
    let unique: HashSet<&str> = seqs.flat_map(|s| s.iter().map(String::as_str)).collect();
    let (mean, q1, q2, q3) = quartiles(&lengths);
    LengthStats {
        mean,
        q1,
        q2,
        q3,
        unique_tokens: unique.len(),
    }
}

pub fn corpus_stats(pairs: &[TokenizedPair]) -> Option<CorpusStats> {
    if pairs.is_empty() {
        return None;
    }
    Some(CorpusStats {
        pairs: pairs.len(),
        comment: length_stats(pairs.iter().map(|p| p.comment_tokens.as_slice())),
        code: length_stats(pairs.iter().map(|p| p.code_tokens.as_slice())),
    })
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    for rec in records {
        serde_json::to_writer(&mut out, rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_raw_pairs(path: &Path) -> Result<Vec<RawPair>, CorpusError> {
    read_jsonl(path)
}

pub fn read_tokenized_pairs(path: &Path) -> Result<Vec<TokenizedPair>, CorpusError> {
    read_jsonl(path)
}

/// Loads either a raw pairs file (tokenized and filtered on the way in) or
/// an already preprocessed one.
pub fn load_training_pairs(path: &Path, filter: &FilterConfig) -> Result<Vec<TokenizedPair>, CorpusError> {
    let values: Vec<serde_json::Value> = read_jsonl(path)?;
    let preprocessed = values.first().is_some_and(|v| v.get("code_tokens").is_some());
    let mut out = Vec::with_capacity(values.len());
    for (i, value) in values.into_iter().enumerate() {
        let parse_err = |e: serde_json::Error| CorpusError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        };
        if preprocessed {
            out.push(serde_json::from_value(value).map_err(parse_err)?);
        } else {
            let raw: RawPair = serde_json::from_value(value).map_err(parse_err)?;
            if let Ok(tp) = preprocess_pair(&raw, filter) {
                out.push(tp);
            }
        }
    }
    Ok(out)
}

pub fn preprocess_pair(raw: &RawPair, filter: &FilterConfig) -> Result<TokenizedPair, DropReason> {
    match filter_pair(&raw.comment, &raw.code, filter) {
        FilterDecision::Keep { code, comment } => Ok(TokenizedPair {
            id: raw.id.clone(),
            code_tokens: code.tokens,
            comment_tokens: comment.tokens,
        }),
        FilterDecision::Drop(reason) => Err(reason),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PreprocessSummary {
    pub read: usize,
    pub kept: usize,
    pub dropped: HashMap<DropReason, usize>,
}

/// Tokenizes and filters every pair of `pairs`.
pub fn preprocess(pairs: &[RawPair], filter: &FilterConfig) -> (Vec<TokenizedPair>, PreprocessSummary) {
    let mut summary = PreprocessSummary {
        read: pairs.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    for raw in pairs {
        match preprocess_pair(raw, filter) {
            Ok(tp) => kept.push(tp),
            Err(reason) => *summary.dropped.entry(reason).or_default() += 1,
        }
    }
    summary.kept = kept.len();
    (kept, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{}", (b'a' + (i % 26) as u8) as char)).collect::<Vec<_>>().join(" ")
    }

    fn seqs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| t.split_whitespace().map(String::from).collect()).collect()
    }

    #[test]
    fn filter_boundaries() {
        let cfg = FilterConfig::default();
        let code = "int f ( ) { }";
        assert_eq!(filter_pair("one two three", code, &cfg), FilterDecision::Drop(DropReason::TooShortComment));
        let thirty_six = vec!["word"; 36].join(" ");
        assert_eq!(filter_pair(&thirty_six, code, &cfg), FilterDecision::Drop(DropReason::TooLongComment));
        let thirty_five = vec!["word"; 35].join(" ");
        let hundred = vec!["x"; 100].join(" ");
        assert!(matches!(filter_pair(&thirty_five, &hundred, &cfg), FilterDecision::Keep { .. }));
        let hundred_one = vec!["x"; 101].join(" ");
        assert_eq!(filter_pair(&thirty_five, &hundred_one, &cfg), FilterDecision::Drop(DropReason::TooLongCode));
        assert_eq!(filter_pair(&thirty_five, "  ", &cfg), FilterDecision::Drop(DropReason::EmptyCode));
    }

    #[test]
    fn filter_heuristics() {
        let cfg = FilterConfig::default();
        let code = "void f() {}";
        assert_eq!(
            filter_pair("This file was Auto-Generated by a tool", code, &cfg),
            FilterDecision::Drop(DropReason::AutoGenerated)
        );
        assert_eq!(
            filter_pair("Отправляет сообщение указанному сервису", code, &cfg),
            FilterDecision::Drop(DropReason::NonEnglish)
        );
        assert!(matches!(filter_pair(&words(6), code, &cfg), FilterDecision::Keep { .. }));
    }

    #[test]
    fn vocab_frequency_then_lexicographic() {
        let corpus = seqs(&["a a b"]);
        let v = build_vocab(corpus.iter().map(Vec::as_slice), None, 1).unwrap();
        assert_eq!(v.tokens(), ["<pad>", "<unk>", "<sos>", "<eos>", "a", "b"]);
        let corpus = seqs(&["b a"]);
        let v = build_vocab(corpus.iter().map(Vec::as_slice), None, 1).unwrap();
        assert_eq!(v.id("a"), 4);
        assert_eq!(v.id("b"), 5);
        let corpus = seqs(&["a a b c c c d"]);
        let v = build_vocab(corpus.iter().map(Vec::as_slice), Some(2), 1).unwrap();
        assert_eq!(v.tokens()[4..], ["c", "a"]);
        let v = build_vocab(corpus.iter().map(Vec::as_slice), None, 2).unwrap();
        assert_eq!(v.id("b"), UNK_ID);
        assert!(matches!(build_vocab(std::iter::empty(), None, 1), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn encode_examples() {
        let corpus = seqs(&["a a b"]);
        let v = build_vocab(corpus.iter().map(Vec::as_slice), None, 1).unwrap();
        let t = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        assert_eq!(encode(&t("a"), &v, 4, false).unwrap(), [4, 0, 0, 0]);
        assert_eq!(encode(&t("zzz-unseen"), &v, 4, false).unwrap(), [1, 0, 0, 0]);
        assert_eq!(encode(&t("a b"), &v, 6, true).unwrap(), [2, 4, 5, 3, 0, 0]);
        assert!(matches!(encode(&t("a b a"), &v, 4, true), Err(CorpusError::SequenceTooLong { len: 5, max_len: 4 })));
        assert_eq!(v.decode(&encode(&t("a b"), &v, 6, true).unwrap()), t("a b"));
    }

    #[test]
    fn vocab_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = seqs(&["x y y z"]);
        let v = build_vocab(corpus.iter().map(Vec::as_slice), None, 1).unwrap();
        let path = dir.path().join("vocab.txt");
        v.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<pad>\n<unk>\n<sos>\n<eos>\ny\n"));
        assert_eq!(Vocabulary::read(&path).unwrap(), v);
        std::fs::write(&path, "a\nb\n").unwrap();
        assert!(matches!(Vocabulary::read(&path), Err(CorpusError::BadVocabFile { .. })));
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let ids: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let s = split_dataset(&ids, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (8, 1, 1));
        // floor(5.6) = 5, floor(0.7) = 0, remainder 2
        let s = split_dataset(&ids[..7], (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (5, 0, 2));
        assert_eq!(s, split_dataset(&ids[..7], (0.8, 0.1, 0.1), 7).unwrap());
        assert!(matches!(split_dataset(&ids[..2], (0.8, 0.1, 0.1), 7), Err(CorpusError::TooFewPairs(2))));
        assert!(matches!(split_dataset(&ids, (0.5, 0.1, 0.1), 7), Err(CorpusError::BadRatios(_))));
    }

    #[test]
    fn quartile_examples() {
        assert_eq!(quartiles(&[7, 9, 14]), (10.0, 7.0, 9.0, 14.0));
        let (mean, q1, q2, q3) = quartiles(&[4, 1, 3, 2]);
        assert_eq!((mean, q1, q2, q3), (2.5, 1.5, 2.5, 3.5));
        assert_eq!(quartiles(&[5]), (5.0, 5.0, 5.0, 5.0));
    }

    #[test]
    fn stats_count_unique_tokens() {
        let pairs = vec![
            TokenizedPair { id: "1".into(), code_tokens: seqs(&["a b"])[0].clone(), comment_tokens: seqs(&["x y z w"])[0].clone() },
            TokenizedPair { id: "2".into(), code_tokens: seqs(&["a c d"])[0].clone(), comment_tokens: seqs(&["x x"])[0].clone() },
        ];
        let stats = corpus_stats(&pairs).unwrap();
        assert_eq!(stats.code.unique_tokens, 4);
        assert_eq!(stats.comment.unique_tokens, 4);
        assert_eq!(stats.comment.mean, 3.0);
        assert!(corpus_stats(&[]).is_none());
    }
}
