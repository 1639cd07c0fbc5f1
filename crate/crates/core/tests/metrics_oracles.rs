mod common;

use evsumm::metrics::{bleu4, brevity_penalty, meteor, modified_ngram_precision, sentence_bleu, Aggregation, MeteorMode};
use proptest::prelude::*;

fn seq(max: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..5, 1..=max)
}

proptest! {
    #[test]
    fn sentence_bleu_matches_oracle(c in seq(12), r in seq(12)) {
        let got = sentence_bleu(&c, &r, false);
        prop_assert!((got - common::sentence_bleu(&c, &r)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn clipped_counts_match_oracle(c in seq(12), r in seq(12), n in 1usize..=4) {
        prop_assert_eq!(modified_ngram_precision(&c, &r, n), common::clipped(&c, &r, n));
    }

    #[test]
    fn corpus_bleu_matches_oracle(pairs in prop::collection::vec((seq(10), seq(10)), 1..12)) {
        let cands: Vec<&[u32]> = pairs.iter().map(|(c, _)| c.as_slice()).collect();
        let refs: Vec<&[u32]> = pairs.iter().map(|(_, r)| r.as_slice()).collect();
        let got = bleu4(&cands, &refs, Aggregation::Corpus, false).unwrap();
        prop_assert!((got - common::corpus_bleu(&pairs)).abs() <= 1e-12);
    }

    #[test]
    fn meteor_matches_oracle(c in seq(10), r in seq(10)) {
        for (mode, standard) in [(MeteorMode::PaperLiteral, false), (MeteorMode::Standard, true)] {
            let got = meteor(&c, &r, mode);
            prop_assert!((got - common::meteor(&c, &r, standard)).abs() <= 1e-12, "{:?}", mode);
        }
    }

    #[test]
    fn identical_sentences_score_one(s in seq(20)) {
        prop_assume!(s.len() >= 4);
        prop_assert_eq!(sentence_bleu(&s, &s, false), 1.0);
    }
}

#[test]
fn brevity_penalty_values() {
    assert_eq!(brevity_penalty(5, 4), 1.0);
    assert_eq!(brevity_penalty(4, 4), 1.0);
    assert!((brevity_penalty(2, 4) - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(brevity_penalty(0, 3), 0.0);
}

#[test]
fn standard_meteor_on_identity() {
    let s = [7u32, 8, 9, 10];
    assert_eq!(meteor(&s, &s, MeteorMode::Standard), 0.9921875);
    // One chunk over four matches leaves a penalty of 0.5 / 64.
    assert_eq!(meteor(&s, &s, MeteorMode::PaperLiteral), 5.0 * (1.0 - 0.5 / 64.0));
}

#[test]
fn exhaustive_short_sequences() {
    let all = common::all_sequences(2, 4);
    for c in &all {
        for r in &all {
            let b = bleu4(&[c.as_slice()], &[r.as_slice()], Aggregation::Corpus, false).unwrap();
            assert!((b - common::sentence_bleu(c, r)).abs() <= 1e-12, "{c:?} {r:?}");
            for (mode, standard) in [(MeteorMode::PaperLiteral, false), (MeteorMode::Standard, true)] {
                assert!((meteor(c, r, mode) - common::meteor(c, r, standard)).abs() <= 1e-12);
            }
        }
    }
}
