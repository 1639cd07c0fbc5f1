use std::collections::BTreeSet;

use evsumm::corpus::{build_vocab, encode, split_dataset, EOS_ID, NUM_RESERVED, PAD_ID, SOS_ID, UNK_ID};
use proptest::prelude::*;

fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-f]{1,3}", 1..10), 1..20)
}

proptest! {
    #[test]
    fn known_tokens_round_trip(corpus in sentences()) {
        let vocab = build_vocab(corpus.iter().map(|s| s.as_slice()), None, 1).unwrap();
        for s in &corpus {
            let ids = encode(s, &vocab, 12, false).unwrap();
            prop_assert_eq!(ids.len(), 12);
            let body: Vec<u32> = ids.iter().copied().take_while(|&i| i != PAD_ID).collect();
            prop_assert!(body.iter().all(|&i| i as usize >= NUM_RESERVED));
            let keep = s.len().min(12);
            prop_assert_eq!(vocab.decode(&body), s[..keep].to_vec());
        }
    }

    #[test]
    fn delimited_encoding_is_framed(corpus in sentences()) {
        let vocab = build_vocab(corpus.iter().map(|s| s.as_slice()), None, 1).unwrap();
        for s in &corpus {
            let ids = encode(s, &vocab, 37, true).unwrap();
            prop_assert_eq!(ids[0], SOS_ID);
            prop_assert_eq!(ids[s.len() + 1], EOS_ID);
            prop_assert!(ids[s.len() + 2..].iter().all(|&i| i == PAD_ID));
        }
    }

    #[test]
    fn capped_vocab_maps_the_rest_to_unk(corpus in sentences(), cap in 0usize..6) {
        let vocab = build_vocab(corpus.iter().map(|s| s.as_slice()), Some(cap), 1).unwrap();
        prop_assert!(vocab.len() <= NUM_RESERVED + cap);
        for s in &corpus {
            for t in s {
                let id = vocab.id(t);
                prop_assert!(id == UNK_ID || vocab.token(id) == Some(t.as_str()));
            }
        }
    }

    #[test]
    fn split_is_a_partition(n in 3usize..200, seed in any::<u64>()) {
        let ids: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let split = split_dataset(&ids, (0.8, 0.1, 0.1), seed).unwrap();
        let all: Vec<&String> = split.train.iter().chain(&split.valid).chain(&split.test).collect();
        prop_assert_eq!(all.len(), n);
        let unique: BTreeSet<&String> = all.into_iter().collect();
        prop_assert_eq!(unique.len(), n);
        prop_assert_eq!(split.train.len(), n * 8 / 10);
        let again = split_dataset(&ids, (0.8, 0.1, 0.1), seed).unwrap();
        prop_assert_eq!(split, again);
    }
}
