//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Occurrences of `gram` in `seq`, by scanning every window.
fn occurrences(seq: &[u32], gram: &[u32]) -> usize {
    if gram.is_empty() || seq.len() < gram.len() {
        return 0;
    }
    (0..=seq.len() - gram.len()).filter(|&i| &seq[i..i + gram.len()] == gram).count()
}

/// Clipped matches and candidate n-gram total, tabulating each distinct
/// candidate n-gram once.
pub fn clipped(candidate: &[u32], reference: &[u32], n: usize) -> (usize, usize) {
    if candidate.len() < n {
        return (0, 0);
    }
    let mut seen: Vec<&[u32]> = Vec::new();
    let mut matched = 0;
    for i in 0..=candidate.len() - n {
        let gram = &candidate[i..i + n];
        if seen.contains(&gram) {
            continue;
        }
        seen.push(gram);
        matched += occurrences(candidate, gram).min(occurrences(reference, gram));
    }
    (matched, candidate.len() + 1 - n)
}

fn brevity(c: usize, r: usize) -> f64 {
    if c > r {
        1.0
    } else if c == 0 {
        if r == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

fn bleu_from_counts(m: [usize; 4], t: [usize; 4], c: usize, r: usize) -> f64 {
    let mut product = 1.0;
    for n in 0..4 {
        if t[n] == 0 || m[n] == 0 {
            return 0.0;
        }
        product *= m[n] as f64 / t[n] as f64;
    }
    brevity(c, r) * product.powf(0.25)
}

pub fn sentence_bleu(candidate: &[u32], reference: &[u32]) -> f64 {
    let mut m = [0; 4];
    let mut t = [0; 4];
    for n in 1..=4 {
        (m[n - 1], t[n - 1]) = clipped(candidate, reference, n);
    }
    bleu_from_counts(m, t, candidate.len(), reference.len())
}

pub fn corpus_bleu(pairs: &[(Vec<u32>, Vec<u32>)]) -> f64 {
    let mut m = [0; 4];
    let mut t = [0; 4];
    let (mut c, mut r) = (0, 0);
    for (cand, refr) in pairs {
        for n in 1..=4 {
            let (a, b) = clipped(cand, refr, n);
            m[n - 1] += a;
            t[n - 1] += b;
        }
        c += cand.len();
        r += refr.len();
    }
    bleu_from_counts(m, t, c, r)
}

/// Best `(matches, chunks)` over every one-to-one exact-match alignment:
/// most matches first, then fewest chunks.
pub fn best_alignment(candidate: &[u32], reference: &[u32]) -> (usize, usize) {
    fn chunks(pairs: &[(usize, usize)]) -> usize {
        let mut count = 0;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if k == 0 || pairs[k - 1] != (i - 1, j.wrapping_sub(1)) {
                count += 1;
            }
        }
        count
    }
    fn search(
        i: usize,
        candidate: &[u32],
        reference: &[u32],
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        best: &mut (usize, usize),
    ) {
        if i == candidate.len() {
            let key = (pairs.len(), chunks(pairs));
            if key.0 > best.0 || (key.0 == best.0 && key.1 < best.1) {
                *best = key;
            }
            return;
        }
        // Even matching every remaining word cannot reach the best count.
        if pairs.len() + (candidate.len() - i) < best.0 {
            return;
        }
        for j in 0..reference.len() {
            if !used[j] && reference[j] == candidate[i] {
                used[j] = true;
                pairs.push((i, j));
                search(i + 1, candidate, reference, used, pairs, best);
                pairs.pop();
                used[j] = false;
            }
        }
        search(i + 1, candidate, reference, used, pairs, best);
    }
    let mut best = (0, usize::MAX);
    search(0, candidate, reference, &mut vec![false; reference.len()], &mut Vec::new(), &mut best);
    if best.0 == 0 {
        (0, 0)
    } else {
        best
    }
}

pub fn meteor(candidate: &[u32], reference: &[u32], standard: bool) -> f64 {
    let (m, ch) = best_alignment(candidate, reference);
    if m == 0 {
        return 0.0;
    }
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let f = if standard { 10.0 * p * r / (r + 9.0 * p) } else { 10.0 * r * p / (r + p) };
    let frag = ch as f64 / m as f64;
    f * (1.0 - 0.5 * frag * frag * frag)
}

/// Every sequence of length `0..=max_len` over `0..alphabet`.
pub fn all_sequences(alphabet: u32, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|s| (0..alphabet).map(move |t| [s.as_slice(), &[t]].concat()))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Camel-case splitting of an ASCII letter run with the lookahead regex
/// `[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+`.
pub fn camel_oracle(word: &str) -> Vec<String> {
    let re = fancy_regex::Regex::new(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+").unwrap();
    re.find_iter(word).map(|m| m.unwrap().as_str().to_lowercase()).collect()
}

/// Identifier splitting built from the regex oracle: underscores separate,
/// digit runs are their own tokens, letter runs go through the regex.
pub fn identifier_oracle(ident: &str) -> Vec<String> {
    let re = fancy_regex::Regex::new(r"[A-Za-z]+|[0-9]+").unwrap();
    let mut out = Vec::new();
    for m in re.find_iter(ident) {
        let part = m.unwrap().as_str();
        if part.chars().all(|c| c.is_ascii_digit()) {
            out.push(part.to_string());
        } else {
            out.extend(camel_oracle(part));
        }
    }
    out
}
