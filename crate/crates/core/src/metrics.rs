//! BLEU4, METEOR and perplexity.
//!
//! BLEU follows the clipped n-gram precision / brevity penalty formulation
//! with a geometric mean over n = 1..=4. METEOR uses exact surface matching
//! only; chunk counts come from the alignment that minimizes chunks among all
//! maximum-cardinality alignments.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BLEU_MAX_ORDER: usize = 4;
/// Alignments with more matches than this fall back to the greedy chunker.
pub const DEFAULT_EXHAUSTIVE_CUTOFF: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("no candidate/reference pairs to score")]
    Empty,
    #[error("{candidates} candidates but {references} references")]
    LengthMismatch { candidates: usize, references: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Corpus,
    MeanOfSentences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeteorMode {
    /// `10RP / (R + P) * (1 - PN)`
    #[default]
    PaperLiteral,
    /// `10PR / (R + 9P) * (1 - PN)`
    Standard,
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram matches and the candidate's n-gram count.
pub fn modified_ngram_precision<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> (usize, usize) {
    assert!(n >= 1, "n-gram order must be positive");
    if candidate.len() < n {
        return (0, 0);
    }
    let reference_counts = ngram_counts(reference, n);
    let matched = ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, count)| count.min(reference_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    (matched, candidate.len() + 1 - n)
}

pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len > reference_len {
        1.0
    } else if candidate_len == 0 {
        if reference_len == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    }
}

/// Sufficient statistics for BLEU; they add up across sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matches: [usize; BLEU_MAX_ORDER],
    pub totals: [usize; BLEU_MAX_ORDER],
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuStats {
    pub fn new<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> Self {
        let mut stats = Self {
            candidate_len: candidate.len(),
            reference_len: reference.len(),
            ..Default::default()
        };
        for n in 1..=BLEU_MAX_ORDER {
            let (m, t) = modified_ngram_precision(candidate, reference, n);
            stats.matches[n - 1] = m;
            stats.totals[n - 1] = t;
        }
        stats
    }

    pub fn add(&mut self, other: &Self) {
        for n in 0..BLEU_MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    /// `BP * exp(mean log P_n)`. Without smoothing any zero precision makes
    /// the score zero; with it every `P_n` becomes `(m + 1) / (t + 1)`.
    pub fn score(&self, smoothing: bool) -> f64 {
        let mut log_sum = 0.0;
        for n in 0..BLEU_MAX_ORDER {
            let (m, t) = (self.matches[n] as f64, self.totals[n] as f64);
            let p = if smoothing { (m + 1.0) / (t + 1.0) } else if t == 0.0 { 0.0 } else { m / t };
            if p == 0.0 {
                return 0.0;
            }
            log_sum += p.ln();
        }
        brevity_penalty(self.candidate_len, self.reference_len) * (log_sum / BLEU_MAX_ORDER as f64).exp()
    }
}

pub fn sentence_bleu<T: Eq + Hash>(candidate: &[T], reference: &[T], smoothing: bool) -> f64 {
    BleuStats::new(candidate, reference).score(smoothing)
}

fn check_lengths<A, B>(candidates: &[A], references: &[B]) -> Result<(), MetricError> {
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn bleu4<T: Eq + Hash, S: AsRef<[T]>>(
    candidates: &[S],
    references: &[S],
    aggregation: Aggregation,
    smoothing: bool,
) -> Result<f64, MetricError> {
    check_lengths(candidates, references)?;
    let stats = candidates.iter().zip(references).map(|(c, r)| BleuStats::new(c.as_ref(), r.as_ref()));
    Ok(match aggregation {
        Aggregation::Corpus => stats
            .fold(BleuStats::default(), |mut acc, s| {
                acc.add(&s);
                acc
            })
            .score(smoothing),
        Aggregation::MeanOfSentences => stats.map(|s| s.score(smoothing)).sum::<f64>() / candidates.len() as f64,
    })
}

/// A one-to-one matching between candidate and reference positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alignment {
    /// `(candidate index, reference index)`, sorted by candidate index.
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

/// Number of maximal runs `(i, j), (i + 1, j + 1), ...` in an alignment.
pub fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let continuing = sorted.windows(2).filter(|w| w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1).count();
    sorted.len() - continuing
}

fn max_matches<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> usize {
    let mut counts: HashMap<&T, (usize, usize)> = HashMap::new();
    for t in candidate {
        counts.entry(t).or_default().0 += 1;
    }
    for t in reference {
        counts.entry(t).or_default().1 += 1;
    }
    counts.values().map(|&(a, b)| a.min(b)).sum()
}

/// Exact chunk minimization over maximum-cardinality alignments.
struct ChunkSearch<'a, T> {
    candidate: &'a [T],
    /// Bit mask of reference positions holding each candidate token.
    ref_masks: Vec<u64>,
    /// How many of each candidate position's token may stay unmatched.
    skip_budget: Vec<usize>,
    /// Occurrences of each candidate position's token in `candidate[..i]`.
    prefix_count: Vec<usize>,
    memo: HashMap<(usize, u64, usize), usize>,
}

const NO_PREV: usize = usize::MAX;

impl<'a, T: Eq + Hash> ChunkSearch<'a, T> {
    fn new(candidate: &'a [T], reference: &[T]) -> Self {
        let mut ref_mask_of: HashMap<&T, u64> = HashMap::new();
        for (j, t) in reference.iter().enumerate() {
            *ref_mask_of.entry(t).or_default() |= 1 << j;
        }
        let mut cand_count: HashMap<&T, usize> = HashMap::new();
        let mut prefix_count = Vec::with_capacity(candidate.len());
        for t in candidate {
            let c = cand_count.entry(t).or_default();
            prefix_count.push(*c);
            *c += 1;
        }
        let ref_masks: Vec<u64> = candidate.iter().map(|t| ref_mask_of.get(t).copied().unwrap_or(0)).collect();
        let skip_budget = candidate
            .iter()
            .zip(&ref_masks)
            .map(|(t, m)| cand_count[t].saturating_sub(m.count_ones() as usize))
            .collect();
        Self {
            candidate,
            ref_masks,
            skip_budget,
            prefix_count,
            memo: HashMap::new(),
        }
    }

    fn can_skip(&self, i: usize, used: u64) -> bool {
        let matched_so_far = (used & self.ref_masks[i]).count_ones() as usize;
        let skipped_so_far = self.prefix_count[i] - matched_so_far;
        skipped_so_far < self.skip_budget[i]
    }

    /// Most adjacent continuations reachable from position `i`.
    fn best(&mut self, i: usize, used: u64, prev: usize) -> usize {
        if i == self.candidate.len() {
            return 0;
        }
        let key = (i, used, prev);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut best = None;
        if self.can_skip(i, used) {
            best = Some(self.best(i + 1, used, NO_PREV));
        }
        let mut free = self.ref_masks[i] & !used;
        while free != 0 {
            let j = free.trailing_zeros() as usize;
            free &= free - 1;
            let gain = usize::from(prev != NO_PREV && j == prev + 1);
            let v = gain + self.best(i + 1, used | (1 << j), j);
            best = Some(best.map_or(v, |b: usize| b.max(v)));
        }
        let v = best.expect("a maximum alignment always extends");
        self.memo.insert(key, v);
        v
    }

    fn solve(mut self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        let (mut used, mut prev) = (0u64, NO_PREV);
        for i in 0..self.candidate.len() {
            let target = self.best(i, used, prev);
            let mut chosen = None;
            let mut free = self.ref_masks[i] & !used;
            // Prefer matches, leftmost first, then skipping.
            while free != 0 {
                let j = free.trailing_zeros() as usize;
                free &= free - 1;
                let gain = usize::from(prev != NO_PREV && j == prev + 1);
                if gain + self.best(i + 1, used | (1 << j), j) == target {
                    chosen = Some(j);
                    break;
                }
            }
            match chosen {
                Some(j) => {
                    pairs.push((i, j));
                    used |= 1 << j;
                    prev = j;
                }
                None => {
                    debug_assert!(self.can_skip(i, used));
                    prev = NO_PREV;
                }
            }
        }
        pairs
    }
}

/// Left-to-right matching that extends the current chunk when it can and
/// otherwise takes the leftmost free reference position.
fn greedy_alignment<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> Vec<(usize, usize)> {
    let mut used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, tok) in candidate.iter().enumerate() {
        let extend = prev.map(|p| p + 1).filter(|&j| j < reference.len() && !used[j] && reference[j] == *tok);
        let j = extend.or_else(|| (0..reference.len()).find(|&j| !used[j] && reference[j] == *tok));
        if let Some(j) = j {
            used[j] = true;
            pairs.push((i, j));
        }
        prev = j;
    }
    pairs
}

/// Maximum-cardinality exact-match alignment with as few chunks as the
/// search finds. Exact when the match count is at most `exhaustive_cutoff`
/// and the reference fits a 64-bit position mask.
pub fn align<T: Eq + Hash>(candidate: &[T], reference: &[T], exhaustive_cutoff: usize) -> Alignment {
    let m = max_matches(candidate, reference);
    let pairs = if m == 0 {
        Vec::new()
    } else if m <= exhaustive_cutoff && reference.len() <= 64 {
        ChunkSearch::new(candidate, reference).solve()
    } else {
        greedy_alignment(candidate, reference)
    };
    debug_assert_eq!(pairs.len(), m);
    Alignment {
        chunks: count_chunks(&pairs),
        pairs,
    }
}

/// Sufficient statistics for METEOR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeteorStats {
    pub matches: usize,
    pub chunks: usize,
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl MeteorStats {
    pub fn new<T: Eq + Hash>(candidate: &[T], reference: &[T], exhaustive_cutoff: usize) -> Self {
        let alignment = align(candidate, reference, exhaustive_cutoff);
        Self {
            matches: alignment.matches(),
            chunks: alignment.chunks,
            candidate_len: candidate.len(),
            reference_len: reference.len(),
        }
    }

    pub fn add(&mut self, other: &Self) {
        self.matches += other.matches;
        self.chunks += other.chunks;
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    pub fn score(&self, mode: MeteorMode) -> f64 {
        if self.matches == 0 {
            return 0.0;
        }
        let m = self.matches as f64;
        let precision = m / self.candidate_len as f64;
        let recall = m / self.reference_len as f64;
        let penalty = 0.5 * (self.chunks as f64 / m).powi(3);
        let fmean = match mode {
            MeteorMode::PaperLiteral => 10.0 * recall * precision / (recall + precision),
            MeteorMode::Standard => 10.0 * precision * recall / (recall + 9.0 * precision),
        };
        fmean * (1.0 - penalty)
    }
}

pub fn meteor<T: Eq + Hash>(candidate: &[T], reference: &[T], mode: MeteorMode) -> f64 {
    MeteorStats::new(candidate, reference, DEFAULT_EXHAUSTIVE_CUTOFF).score(mode)
}

pub fn meteor_corpus<T: Eq + Hash, S: AsRef<[T]>>(
    candidates: &[S],
    references: &[S],
    mode: MeteorMode,
    aggregation: Aggregation,
    exhaustive_cutoff: usize,
) -> Result<f64, MetricError> {
    check_lengths(candidates, references)?;
    let stats = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| MeteorStats::new(c.as_ref(), r.as_ref(), exhaustive_cutoff));
    Ok(match aggregation {
        Aggregation::Corpus => stats
            .fold(MeteorStats::default(), |mut acc, s| {
                acc.add(&s);
                acc
            })
            .score(mode),
        Aggregation::MeanOfSentences => stats.map(|s| s.score(mode)).sum::<f64>() / candidates.len() as f64,
    })
}

/// `exp(total_loss / token_count)`.
pub fn perplexity(total_loss: f64, token_count: usize) -> f64 {
    assert!(token_count >= 1, "perplexity needs at least one token");
    (total_loss / token_count as f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub bleu_aggregation: Aggregation,
    pub bleu_smoothing: bool,
    pub meteor_mode: MeteorMode,
    pub meteor_aggregation: Aggregation,
    /// Also report METEOR in the other mode.
    pub both_meteor_modes: bool,
    pub exhaustive_cutoff: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            bleu_aggregation: Aggregation::Corpus,
            bleu_smoothing: false,
            meteor_mode: MeteorMode::PaperLiteral,
            meteor_aggregation: Aggregation::MeanOfSentences,
            both_meteor_modes: false,
            exhaustive_cutoff: DEFAULT_EXHAUSTIVE_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub bleu4: f64,
    pub meteor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meteor_alt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu4: f64,
    pub bleu_aggregation: Aggregation,
    pub meteor: f64,
    pub meteor_mode: MeteorMode,
    pub meteor_aggregation: Aggregation,
    /// METEOR in the other mode, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meteor_alt: Option<f64>,
    pub perplexity: Option<f64>,
    pub n: usize,
    pub per_sentence: Vec<SentenceScore>,
}

fn other_mode(mode: MeteorMode) -> MeteorMode {
    match mode {
        MeteorMode::PaperLiteral => MeteorMode::Standard,
        MeteorMode::Standard => MeteorMode::PaperLiteral,
    }
}

/// Scores aligned candidate/reference token lists.
pub fn evaluate(
    ids: Option<&[String]>,
    candidates: &[Vec<String>],
    references: &[Vec<String>],
    config: &EvalConfig,
) -> Result<MetricReport, MetricError> {
    check_lengths(candidates, references)?;
    let alt = config.both_meteor_modes.then(|| other_mode(config.meteor_mode));
    let per_sentence = candidates
        .iter()
        .zip(references)
        .enumerate()
        .map(|(i, (c, r))| {
            let stats = MeteorStats::new(c, r, config.exhaustive_cutoff);
            SentenceScore {
                id: ids.map(|ids| ids[i].clone()),
                bleu4: sentence_bleu(c, r, config.bleu_smoothing),
                meteor: stats.score(config.meteor_mode),
                meteor_alt: alt.map(|m| stats.score(m)),
            }
        })
        .collect();
    let meteor_for = |mode| meteor_corpus(candidates, references, mode, config.meteor_aggregation, config.exhaustive_cutoff);
    Ok(MetricReport {
        bleu4: bleu4(candidates, references, config.bleu_aggregation, config.bleu_smoothing)?,
        bleu_aggregation: config.bleu_aggregation,
        meteor: meteor_for(config.meteor_mode)?,
        meteor_mode: config.meteor_mode,
        meteor_aggregation: config.meteor_aggregation,
        meteor_alt: alt.map(meteor_for).transpose()?,
        perplexity: None,
        n: candidates.len(),
        per_sentence,
    })
}
